#include "trendfx/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace trendfx::data {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  auto not_space = [](unsigned char ch) { return !std::isspace(ch); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::string where(std::size_t row, const std::string& column) {
  return "line " + std::to_string(row + 1) + ", column '" + column + "'";
}

double parse_double(const std::string& text, std::size_t row, const std::string& column) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw ParseError("unparseable number '" + text + "' at " + where(row, column));
  }
  return v;
}

std::int64_t parse_int(const std::string& text, std::size_t row, const std::string& column) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError("unparseable timestamp '" + text + "' at " + where(row, column));
  }
  return v;
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw MissingColumnError("column '" + name + "' not in header");
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

MultivariateSeries::MultivariateSeries(std::vector<std::int64_t> timestamps, std::vector<double> target,
                                       std::vector<std::vector<double>> drivers,
                                       std::vector<std::string> names)
    : timestamps_(std::move(timestamps)),
      target_(std::move(target)),
      drivers_(std::move(drivers)),
      names_(std::move(names)) {
  const std::size_t n = timestamps_.size();
  if (n == 0) throw InvalidArgument("series must contain at least one observation");
  if (target_.size() != n) throw ShapeError("target length differs from timestamp length");
  for (const auto& d : drivers_) {
    if (d.size() != n) throw ShapeError("driver length differs from timestamp length");
  }
  if (names_.empty()) {
    names_.push_back("target");
    for (std::size_t i = 0; i < drivers_.size(); ++i) names_.push_back("x" + std::to_string(i + 1));
  }
  if (names_.size() != drivers_.size() + 1) throw ShapeError("expected one name per channel");
  for (std::size_t i = 1; i < n; ++i) {
    if (timestamps_[i] <= timestamps_[i - 1]) {
      throw NonMonotoneTimestampError("timestamps not strictly increasing at index " + std::to_string(i));
    }
  }
}

std::span<const double> MultivariateSeries::channel(std::size_t c) const {
  if (c == 0) return target_;
  if (c > drivers_.size()) throw InvalidArgument("channel index out of range");
  return drivers_[c - 1];
}

MultivariateSeries MultivariateSeries::slice(std::size_t begin, std::size_t end) const {
  if (begin >= end || end > length()) throw InvalidArgument("invalid slice bounds");
  auto cut = [&](const auto& v) { return std::vector(v.begin() + begin, v.begin() + end); };
  std::vector<std::vector<double>> drivers;
  drivers.reserve(drivers_.size());
  for (const auto& d : drivers_) drivers.push_back(cut(d));
  return {cut(timestamps_), cut(target_), std::move(drivers), names_};
}

MultivariateSeries load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw MissingFileError("cannot open '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) throw ParseError("'" + path.string() + "' has no header row");
  std::vector<std::string> header = split_csv_line(line);
  for (auto& h : header) h = trim(h);

  const std::size_t ts_col = column_index(header, schema.timestamp_column);
  std::size_t target_col = 0;
  if (schema.target_column.empty()) {
    if (header.size() < 2) throw MissingColumnError("header names no target column");
    target_col = ts_col == 0 ? 1 : 0;
  } else {
    target_col = column_index(header, schema.target_column);
  }
  std::vector<std::size_t> driver_cols;
  if (schema.driver_columns.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c != ts_col && c != target_col) driver_cols.push_back(c);
    }
  } else {
    for (const auto& name : schema.driver_columns) driver_cols.push_back(column_index(header, name));
  }

  std::vector<std::int64_t> timestamps;
  std::vector<double> target;
  std::vector<std::vector<double>> drivers(driver_cols.size());
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    auto cell = [&](std::size_t c) -> std::string {
      std::string v = c < cells.size() ? trim(cells[c]) : std::string{};
      if (v.empty()) throw MissingCellError("missing cell at " + where(row, header[c]));
      return v;
    };
    timestamps.push_back(parse_int(cell(ts_col), row, header[ts_col]));
    if (timestamps.size() > 1 && timestamps.back() <= timestamps[timestamps.size() - 2]) {
      throw NonMonotoneTimestampError("timestamp at row " + std::to_string(row) +
                                      " does not increase");
    }
    target.push_back(parse_double(cell(target_col), row, header[target_col]));
    for (std::size_t d = 0; d < driver_cols.size(); ++d) {
      drivers[d].push_back(parse_double(cell(driver_cols[d]), row, header[driver_cols[d]]));
    }
  }
  if (timestamps.empty()) throw ParseError("'" + path.string() + "' has no data rows");

  std::vector<std::string> names{header[target_col]};
  for (auto c : driver_cols) names.push_back(header[c]);
  return {std::move(timestamps), std::move(target), std::move(drivers), std::move(names)};
}

void write_csv(const std::filesystem::path& path, const MultivariateSeries& series) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out.precision(17);
  out << "timestamp";
  for (const auto& n : series.names()) out << ',' << n;
  out << '\n';
  for (std::size_t i = 0; i < series.length(); ++i) {
    out << series.timestamps()[i] << ',' << series.target()[i];
    for (const auto& d : series.drivers()) out << ',' << d[i];
    out << '\n';
  }
}

std::pair<MultivariateSeries, MultivariateSeries> train_test_split(const MultivariateSeries& series,
                                                                   double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidArgument("train fraction must lie in (0, 1)");
  }
  const std::size_t n = series.length();
  const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_fraction));
  if (n_train == 0 || n_train >= n) throw InvalidArgument("split leaves an empty part");
  return {series.slice(0, n_train), series.slice(n_train, n)};
}

Scaler fit_scaler(const MultivariateSeries& train) {
  Scaler s;
  for (std::size_t c = 0; c < train.n_channels(); ++c) {
    auto v = train.channel(c);
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(v.size());
    double sd = std::sqrt(var);
    // Constant channels (up to rounding) keep unit scale.
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) sd = 1.0;
    s.mean.push_back(mean);
    s.scale.push_back(sd);
  }
  return s;
}

namespace {

template <class F>
MultivariateSeries map_channels(const Scaler& scaler, const MultivariateSeries& series, F f) {
  if (scaler.mean.size() != series.n_channels()) throw ShapeError("scaler channel count mismatch");
  auto map = [&](std::size_t c) {
    auto v = series.channel(c);
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = f(c, v[i]);
    return out;
  };
  std::vector<std::vector<double>> drivers;
  for (std::size_t c = 1; c < series.n_channels(); ++c) drivers.push_back(map(c));
  return {series.timestamps(), map(0), std::move(drivers), series.names()};
}

}  // namespace

MultivariateSeries apply_scaler(const Scaler& scaler, const MultivariateSeries& series) {
  return map_channels(scaler, series, [&](std::size_t c, double v) { return scaler.apply(c, v); });
}

MultivariateSeries invert_scaler(const Scaler& scaler, const MultivariateSeries& series) {
  return map_channels(scaler, series, [&](std::size_t c, double v) { return scaler.invert(c, v); });
}

std::size_t window_count(std::size_t length, std::size_t input_steps, std::size_t output_steps,
                         std::size_t stride) {
  if (input_steps == 0 || output_steps == 0) throw InvalidArgument("window sizes must be positive");
  if (stride == 0) throw InvalidArgument("stride must be positive");
  if (input_steps + output_steps > length) {
    throw InvalidArgument("input_steps + output_steps (" + std::to_string(input_steps + output_steps) +
                          ") exceeds series length " + std::to_string(length));
  }
  return (length - input_steps - output_steps) / stride + 1;
}

std::vector<Window> make_windows(const MultivariateSeries& series, std::size_t input_steps,
                                 std::size_t output_steps, std::size_t stride) {
  const std::size_t count = window_count(series.length(), input_steps, output_steps, stride);
  const std::size_t channels = series.n_channels();
  std::vector<Window> windows(count);
  for (std::size_t w = 0; w < count; ++w) {
    Window& win = windows[w];
    win.channels = channels;
    win.input_steps = input_steps;
    win.origin_index = w * stride;
    win.inputs.resize(channels * input_steps);
    for (std::size_t c = 0; c < channels; ++c) {
      auto src = series.channel(c).subspan(win.origin_index, input_steps);
      std::copy(src.begin(), src.end(), win.channel(c).begin());
    }
    auto tgt = series.channel(0).subspan(win.origin_index + input_steps, output_steps);
    win.targets.assign(tgt.begin(), tgt.end());
  }
  return windows;
}

SynthResult synth_generate_components(const SynthSpec& spec) {
  if (spec.length == 0) throw InvalidArgument("synthetic length must be positive");
  if (spec.noise_std < 0.0) throw InvalidArgument("noise_std must be non-negative");
  if (spec.slope_min > spec.slope_max) throw InvalidArgument("empty slope range");
  if (!spec.driver_coupling.empty() && spec.driver_coupling.size() != spec.n_drivers) {
    throw InvalidArgument("driver_coupling needs one weight per driver");
  }
  const std::size_t n = spec.length;
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> slope_dist(spec.slope_min, spec.slope_max);
  std::normal_distribution<double> gauss(0.0, 1.0);

  SynthResult r;
  if (n > 2 && spec.knot_count > 0) {
    // Distinct interior knots; a knot at k changes the slope between k-1..k and k..k+1.
    std::vector<std::size_t> candidates(n - 2);
    for (std::size_t i = 0; i < candidates.size(); ++i) candidates[i] = i + 1;
    const std::size_t k = std::min(spec.knot_count, candidates.size());
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, candidates.size() - 1);
      std::swap(candidates[i], candidates[pick(rng)]);
    }
    r.knots.assign(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(r.knots.begin(), r.knots.end());
  }

  r.trend.resize(n);
  double slope = slope_dist(rng);
  double level = spec.base_level;
  std::size_t next_knot = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (t > 0) level += slope;
    r.trend[t] = level;
    if (next_knot < r.knots.size() && r.knots[next_knot] == t) {
      // Resample until the slope actually changes.
      double s = slope_dist(rng);
      for (int tries = 0; s == slope && tries < 8; ++tries) s = slope_dist(rng);
      // Far from the base level, steer back toward it so prices stay positive.
      const double gap = spec.base_level - level;
      if (std::abs(gap) > 0.25 * std::abs(spec.base_level) && s * gap < 0) s = -s;
      slope = s;
      ++next_knot;
    }
  }

  std::vector<std::vector<double>> drivers(spec.n_drivers, std::vector<double>(n));
  const double innov = std::sqrt(std::max(0.0, 1.0 - spec.driver_ar * spec.driver_ar));
  for (auto& d : drivers) {
    double v = gauss(rng);
    for (std::size_t t = 0; t < n; ++t) {
      if (t > 0) v = spec.driver_ar * v + innov * gauss(rng);
      d[t] = v;
    }
  }

  r.coupling.assign(n, 0.0);
  for (std::size_t j = 0; j < spec.driver_coupling.size(); ++j) {
    for (std::size_t t = 0; t < n; ++t) r.coupling[t] += spec.driver_coupling[j] * drivers[j][t];
  }
  r.noise.resize(n);
  for (std::size_t t = 0; t < n; ++t) r.noise[t] = spec.noise_std * gauss(rng);

  std::vector<double> target(n);
  for (std::size_t t = 0; t < n; ++t) target[t] = r.trend[t] + r.coupling[t] + r.noise[t];

  std::vector<std::int64_t> ts(n);
  constexpr std::int64_t kStartMinute = 26297280;  // 2020-01-01T00:00Z
  for (std::size_t t = 0; t < n; ++t) ts[t] = kStartMinute + static_cast<std::int64_t>(t);
  r.series = MultivariateSeries(std::move(ts), std::move(target), std::move(drivers), {});
  return r;
}

MultivariateSeries synth_generate(const SynthSpec& spec) { return synth_generate_components(spec).series; }

}  // namespace trendfx::data
