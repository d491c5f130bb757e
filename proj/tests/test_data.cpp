#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "trendfx/data.hpp"

using namespace trendfx;
namespace fs = std::filesystem;

namespace {

fs::path write_file(const std::string& name, const std::string& body) {
  const auto path = fs::temp_directory_path() / ("trendfx_test_" + name);
  std::ofstream(path) << body;
  return path;
}

data::MultivariateSeries ramp(std::size_t n, std::size_t drivers) {
  std::vector<std::int64_t> ts(n);
  std::vector<double> y(n);
  std::vector<std::vector<double>> d(drivers, std::vector<double>(n));
  std::vector<std::string> names{"y"};
  for (std::size_t j = 0; j < drivers; ++j) names.push_back("d" + std::to_string(j));
  for (std::size_t t = 0; t < n; ++t) {
    ts[t] = static_cast<std::int64_t>(t) * 60;
    y[t] = static_cast<double>(t + 1);
    for (std::size_t j = 0; j < drivers; ++j) d[j][t] = 100.0 * static_cast<double>(j + 1) + static_cast<double>(t);
  }
  return {ts, y, d, names};
}

}  // namespace

TEST(LoadCsv, WellFormedFile) {
  const auto path = write_file("ok.csv", "timestamp,idx,a,b\n1,10.5,1,2\n2,11,1.5,2.5\n3,12,2,3\n");
  const auto s = data::load_csv(path);
  EXPECT_EQ(s.length(), 3u);
  EXPECT_EQ(s.n_drivers(), 2u);
  EXPECT_EQ(s.names(), (std::vector<std::string>{"idx", "a", "b"}));
  EXPECT_DOUBLE_EQ(s.target()[0], 10.5);
  EXPECT_DOUBLE_EQ(s.drivers()[1][2], 3.0);
}

TEST(LoadCsv, SelectsDeclaredColumns) {
  const auto path = write_file("cols.csv", "timestamp,a,idx,b\n1,1,10,2\n2,1,11,2\n");
  data::CsvSchema schema;
  schema.target_column = "idx";
  schema.driver_columns = {"b"};
  const auto s = data::load_csv(path, schema);
  EXPECT_EQ(s.n_drivers(), 1u);
  EXPECT_DOUBLE_EQ(s.target()[1], 11.0);
  EXPECT_DOUBLE_EQ(s.drivers()[0][0], 2.0);
}

TEST(LoadCsv, ErrorsAreDistinct) {
  EXPECT_THROW(data::load_csv("/nonexistent/file.csv"), data::MissingFileError);
  EXPECT_THROW(data::load_csv(write_file("empty_cell.csv", "timestamp,idx,a\n1,2,\n2,3,4\n")), data::MissingCellError);
  EXPECT_THROW(data::load_csv(write_file("bad.csv", "timestamp,idx\n1,abc\n")), data::ParseError);
  EXPECT_THROW(data::load_csv(write_file("mono.csv", "timestamp,idx\n5,1\n5,2\n6,3\n")),
               data::NonMonotoneTimestampError);
  data::CsvSchema schema;
  schema.target_column = "missing";
  EXPECT_THROW(data::load_csv(write_file("col.csv", "timestamp,idx\n1,1\n"), schema), data::MissingColumnError);
}

TEST(LoadCsv, MissingCellNamesRowAndColumn) {
  try {
    data::load_csv(write_file("empty_cell2.csv", "timestamp,idx,a\n1,2,3\n2,3,\n"));
    FAIL();
  } catch (const data::MissingCellError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find('a'), std::string::npos);
    EXPECT_NE(msg.find('3'), std::string::npos);
  }
}

TEST(LoadCsv, RoundTripsWrittenSeries) {
  data::SynthSpec spec;
  spec.length = 50;
  spec.n_drivers = 2;
  const auto s = data::synth_generate(spec);
  const auto path = fs::temp_directory_path() / "trendfx_test_roundtrip.csv";
  data::write_csv(path, s);
  EXPECT_EQ(data::load_csv(path), s);
}

TEST(Split, LargeSeriesSizes) {
  const auto s = ramp(50743, 0);
  const auto [train, test] = data::train_test_split(s, 0.9);
  EXPECT_EQ(train.length(), 45668u);
  EXPECT_EQ(test.length(), 5075u);
}

TEST(Split, SmallCases) {
  auto [a, b] = data::train_test_split(ramp(10, 1), 0.5);
  EXPECT_EQ(a.length(), 5u);
  EXPECT_EQ(b.length(), 5u);
  auto [c, d] = data::train_test_split(ramp(2, 1), 0.9);
  EXPECT_EQ(c.length(), 1u);
  EXPECT_EQ(d.length(), 1u);
}

TEST(Split, ConcatenationReproducesInput) {
  const auto s = ramp(37, 2);
  const auto [train, test] = data::train_test_split(s, 0.7);
  std::vector<double> joined = train.target();
  joined.insert(joined.end(), test.target().begin(), test.target().end());
  EXPECT_EQ(joined, s.target());
  EXPECT_EQ(train.timestamps().back() + 60, test.timestamps().front());
}

TEST(Split, RejectsBadFraction) {
  EXPECT_THROW(data::train_test_split(ramp(10, 0), 0.0), InvalidArgument);
  EXPECT_THROW(data::train_test_split(ramp(10, 0), 1.0), InvalidArgument);
  EXPECT_THROW(data::train_test_split(ramp(10, 0), 1.5), InvalidArgument);
}

TEST(Scaler, ConstantAndSymmetricChannels) {
  data::MultivariateSeries s({1, 2, 3}, {2, 2, 2}, {{0, 1, 2}}, {"y", "d"});
  const auto sc = data::fit_scaler(s);
  EXPECT_DOUBLE_EQ(sc.scale[0], 1.0);
  const auto z = data::apply_scaler(sc, s);
  for (double v : z.target()) EXPECT_DOUBLE_EQ(v, 0.0);

  data::MultivariateSeries two({1, 2}, {0, 2}, {}, {"y"});
  const auto z2 = data::apply_scaler(data::fit_scaler(two), two);
  EXPECT_DOUBLE_EQ(z2.target()[0], -1.0);
  EXPECT_DOUBLE_EQ(z2.target()[1], 1.0);
}

TEST(Scaler, TrainingChannelsStandardized) {
  data::SynthSpec spec;
  spec.length = 500;
  const auto s = data::synth_generate(spec);
  const auto z = data::apply_scaler(data::fit_scaler(s), s);
  for (std::size_t c = 0; c < z.n_channels(); ++c) {
    const auto ch = z.channel(c);
    const double mean = std::accumulate(ch.begin(), ch.end(), 0.0) / static_cast<double>(ch.size());
    double var = 0;
    for (double v : ch) var += (v - mean) * (v - mean);
    EXPECT_NEAR(mean, 0.0, 1e-9);
    EXPECT_NEAR(var / static_cast<double>(ch.size()), 1.0, 1e-9);
  }
}

TEST(Scaler, RoundTripIdentity) {
  data::SynthSpec spec;
  spec.length = 300;
  spec.seed = 9;
  const auto s = data::synth_generate(spec);
  const auto sc = data::fit_scaler(s.slice(0, 200));
  const auto back = data::invert_scaler(sc, data::apply_scaler(sc, s));
  for (std::size_t c = 0; c < s.n_channels(); ++c) {
    for (std::size_t t = 0; t < s.length(); ++t) {
      const double v = s.channel(c)[t];
      EXPECT_LE(std::abs(back.channel(c)[t] - v), 1e-10 * std::max(1.0, std::abs(v)));
    }
  }
}

TEST(Windows, CountsAndTargets) {
  EXPECT_EQ(data::make_windows(ramp(10, 1), 4, 2).size(), 5u);
  EXPECT_EQ(data::window_count(10, 4, 2, 2), 3u);
  EXPECT_EQ(data::make_windows(ramp(10, 1), 4, 2, 2).size(), 3u);
  const auto one = data::make_windows(ramp(6, 2), 4, 2);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].targets, (std::vector<double>{5, 6}));
  EXPECT_EQ(one[0].channels, 3u);
  EXPECT_DOUBLE_EQ(one[0].last_target_input(), 4.0);
  EXPECT_THROW(data::make_windows(ramp(5, 0), 4, 2), InvalidArgument);
}

TEST(Windows, TranslationConsistent) {
  const auto s = ramp(30, 2);
  const auto all = data::make_windows(s, 5, 3);
  const std::size_t k = 7;
  const auto shifted = data::make_windows(s.slice(k, s.length()), 5, 3);
  EXPECT_EQ(all[k].inputs, shifted[0].inputs);
  EXPECT_EQ(all[k].targets, shifted[0].targets);
  EXPECT_EQ(all[k].origin_index, k);
}

TEST(Windows, NoLeakageAcrossSplit) {
  const auto s = ramp(100, 1);
  const auto [train, test] = data::train_test_split(s, 0.8);
  for (const auto& w : data::make_windows(train, 8, 4)) {
    EXPECT_LE(w.origin_index + w.input_steps + w.output_steps(), train.length());
    for (double v : w.targets) EXPECT_LE(v, train.target().back());
  }
}

TEST(Synth, Deterministic) {
  data::SynthSpec spec;
  spec.seed = 7;
  EXPECT_EQ(data::synth_generate(spec), data::synth_generate(spec));
  spec.seed = 8;
  data::SynthSpec other;
  other.seed = 7;
  EXPECT_FALSE(data::synth_generate(spec) == data::synth_generate(other));
}

TEST(Synth, AffineWithoutNoiseOrKnots) {
  data::SynthSpec spec;
  spec.length = 200;
  spec.noise_std = 0.0;
  spec.knot_count = 0;
  spec.driver_coupling = {0.5, -1.0, 2.0};
  const auto r = data::synth_generate_components(spec);
  const auto& y = r.series.target();
  const double slope = r.trend[1] - r.trend[0];
  for (std::size_t t = 0; t < y.size(); ++t) {
    double coupling = 0.0;
    for (std::size_t j = 0; j < 3; ++j) coupling += spec.driver_coupling[j] * r.series.drivers()[j][t];
    EXPECT_NEAR(y[t] - coupling, r.trend[0] + slope * static_cast<double>(t), 1e-9);
  }
}

TEST(Synth, NoiseLevel) {
  data::SynthSpec spec;
  spec.length = 10000;
  spec.noise_std = 1.0;
  spec.driver_coupling = {0.3, 0.2, 0.1};
  const auto r = data::synth_generate_components(spec);
  double mean = 0;
  std::vector<double> e(spec.length);
  for (std::size_t t = 0; t < e.size(); ++t) {
    e[t] = r.series.target()[t] - r.trend[t] - r.coupling[t];
    mean += e[t];
  }
  mean /= static_cast<double>(e.size());
  double var = 0;
  for (double v : e) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(e.size() - 1));
  EXPECT_GE(sd, 0.95);
  EXPECT_LE(sd, 1.05);
}

TEST(Synth, KnotCount) {
  data::SynthSpec spec;
  spec.length = 1000;
  spec.knot_count = 12;
  spec.noise_std = 0;
  const auto r = data::synth_generate_components(spec);
  EXPECT_EQ(r.knots.size(), 12u);
  std::size_t changes = 0;
  for (std::size_t t = 1; t + 1 < r.trend.size(); ++t) {
    if (std::abs(r.trend[t + 1] - 2 * r.trend[t] + r.trend[t - 1]) > 1e-9) ++changes;
  }
  EXPECT_EQ(changes, 12u);
}
