#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "trendfx/l1tf.hpp"

using namespace trendfx;

namespace {

std::vector<double> affine(std::size_t n, double a, double b) {
  std::vector<double> v(n);
  for (std::size_t t = 0; t < n; ++t) v[t] = a + b * static_cast<double>(t);
  return v;
}

double l1_of_d(const std::vector<double>& x) {
  double s = 0;
  for (double v : l1tf::SecondDifference(x.size()).apply(x)) s += std::abs(v);
  return s;
}

double l2_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

TEST(SecondDifference, HandValues) {
  EXPECT_EQ(l1tf::SecondDifference(5).apply(std::vector<double>{0, 0, 1, 2, 3}), (std::vector<double>{1, 0, 0}));
  EXPECT_EQ(l1tf::SecondDifference(3).apply(std::vector<double>{1, 2, 4}), (std::vector<double>{1}));
}

TEST(SecondDifference, AnnihilatesAffine) {
  for (double b : {-3.0, 0.0, 0.25}) {
    for (double v : l1tf::SecondDifference(20).apply(affine(20, 7.0, b))) EXPECT_NEAR(v, 0.0, 1e-12);
  }
}

TEST(SecondDifference, TransposeMatchesDense) {
  std::mt19937_64 rng(1);
  const auto u = oracle::normal_vector(8, rng);
  const auto D = oracle::second_difference(10);
  const Eigen::VectorXd ref = D.transpose() * Eigen::Map<const Eigen::VectorXd>(u.data(), 8);
  const auto got = l1tf::SecondDifference(10).apply_transpose(u);
  for (int i = 0; i < 10; ++i) EXPECT_NEAR(got[static_cast<std::size_t>(i)], ref(i), 1e-14);
}

TEST(SecondDifference, LengthMismatch) {
  EXPECT_THROW(l1tf::SecondDifference(5).apply(std::vector<double>{1, 2, 3}), ShapeError);
  EXPECT_THROW(l1tf::SecondDifference(5).apply_transpose(std::vector<double>{1}), ShapeError);
}

TEST(Objective, HandValues) {
  EXPECT_DOUBLE_EQ(l1tf::objective(std::vector<double>{0, 1, 0}, 1.0, std::vector<double>{0, 0, 0}), 0.5);
  const auto y = affine(6, 1, 2);
  EXPECT_DOUBLE_EQ(l1tf::objective(y, 3.0, y), 0.0);
  EXPECT_DOUBLE_EQ(l1tf::objective(std::vector<double>{3, 1, 4, 1}, 0.0, std::vector<double>{3, 1, 4, 1}), 0.0);
  EXPECT_THROW(l1tf::objective(std::vector<double>{1, 2, 3}, 1.0, std::vector<double>{1, 2}), ShapeError);
}

TEST(LambdaMax, HandValueAndScaling) {
  EXPECT_NEAR(l1tf::lambda_max(std::vector<double>{0, 1, 0}), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(l1tf::lambda_max(affine(10, 2, -1)), 0.0, 1e-12);
  std::mt19937_64 rng(2);
  auto y = oracle::normal_vector(40, rng);
  const double base = l1tf::lambda_max(y);
  for (auto& v : y) v *= -2.5;
  EXPECT_NEAR(l1tf::lambda_max(y), 2.5 * base, 1e-10 * base);
  EXPECT_THROW(l1tf::lambda_max(std::vector<double>{1, 2}), InvalidArgument);
}

TEST(Solve, TrivialCases) {
  const auto y = affine(12, -1, 0.5);
  for (double lambda : {0.0, 0.1, 100.0}) {
    const auto s = l1tf::solve(y, lambda);
    EXPECT_TRUE(s.converged);
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(s.x[i], y[i], 1e-9);
  }
  std::mt19937_64 rng(3);
  const auto r = oracle::normal_vector(30, rng);
  const auto s0 = l1tf::solve(r, 0.0);
  EXPECT_EQ(s0.x, r);
  const auto short_y = std::vector<double>{4, -1};
  const auto s2 = l1tf::solve(short_y, 1.0);
  EXPECT_TRUE(s2.converged);
  EXPECT_EQ(s2.x, short_y);
}

TEST(Solve, AboveLambdaMaxIsAffineFit) {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 5; ++rep) {
    const auto y = oracle::normal_vector(25 + 10 * static_cast<std::size_t>(rep), rng);
    const auto s = l1tf::solve(y, 1.01 * l1tf::lambda_max(y));
    const auto fit = oracle::affine_fit(y);
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(s.x[i], fit[i], 1e-6);
  }
}

TEST(Solve, MatchesDenseOracleSmall) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    const auto y = oracle::normal_vector(8, rng);
    const auto s = l1tf::solve(y, 1.0);
    const auto ref = oracle::l1tf_dense(y, 1.0);
    ASSERT_TRUE(s.converged);
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(s.x[i], ref[i], 1e-6);
  }
}

TEST(Solve, SolutionInvariants) {
  std::mt19937_64 rng(6);
  const auto y = oracle::normal_vector(300, rng, 2.0);
  const auto s = l1tf::solve(y, 0.7);
  ASSERT_TRUE(s.converged);
  EXPECT_LE(s.kkt_residual, 1e-8);
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_DOUBLE_EQ(s.residual[i], y[i] - s.x[i]);
  const double obj = l1tf::objective(y, 0.7, s.x);
  EXPECT_NEAR(s.objective_value, obj, 1e-10 * std::abs(obj));
  EXPECT_LE(s.objective_value, l1tf::objective(y, 0.7, y));
  // The dual certificate is feasible and reproduces x.
  const auto dtz = l1tf::SecondDifference(y.size()).apply_transpose(s.dual);
  for (double z : s.dual) EXPECT_LE(std::abs(z), 0.7 + 1e-12);
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(s.x[i], y[i] - dtz[i], 1e-8);
  EXPECT_NEAR(l1tf::kkt_residual(y, 0.7, s.x, s.dual), s.kkt_residual, 1e-15);
}

TEST(Solve, LambdaSweepMonotone) {
  std::mt19937_64 rng(7);
  const auto y = oracle::normal_vector(200, rng);
  const std::vector<double> lambdas{0.001, 0.01, 0.1, 1, 10};
  std::vector<l1tf::Solution> sols;
  for (double l : lambdas) sols.push_back(l1tf::solve(y, l));
  for (std::size_t k = 1; k < sols.size(); ++k) {
    EXPECT_LE(l1_of_d(sols[k].x), l1_of_d(sols[k - 1].x) + 1e-8);
    EXPECT_GE(l2_dist(y, sols[k].x), l2_dist(y, sols[k - 1].x) - 1e-8);
  }
  // Each solution is optimal for its own lambda.
  for (std::size_t a = 0; a < sols.size(); ++a) {
    for (std::size_t b = 0; b < sols.size(); ++b) {
      EXPECT_GE(l1tf::objective(y, lambdas[b], sols[a].x), sols[b].objective_value - 1e-9);
    }
  }
}

TEST(Solve, TranslationInvariant) {
  std::mt19937_64 rng(8);
  const auto y = oracle::normal_vector(150, rng);
  auto shifted = y;
  for (std::size_t t = 0; t < y.size(); ++t) shifted[t] += 3.0 - 0.2 * static_cast<double>(t);
  const auto a = l1tf::solve(y, 0.5);
  const auto b = l1tf::solve(shifted, 0.5);
  for (std::size_t t = 0; t < y.size(); ++t) {
    EXPECT_NEAR(b.x[t], a.x[t] + 3.0 - 0.2 * static_cast<double>(t), 1e-8);
  }
}

TEST(Solve, PiecewiseLinearPieces) {
  std::mt19937_64 rng(9);
  const auto y = oracle::normal_vector(400, rng);
  const auto s = l1tf::solve(y, 2.0);
  const auto dx = l1tf::SecondDifference(y.size()).apply(s.x);
  std::size_t knots = 0;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    // Either a knot (dual at the bound) or a straight stretch.
    if (std::abs(std::abs(s.dual[i]) - 2.0) > 1e-6) {
      EXPECT_NEAR(dx[i], 0.0, 1e-8);
    }
    if (std::abs(dx[i]) > 1e-8) ++knots;
  }
  EXPECT_GT(knots, 0u);
  EXPECT_LT(knots, dx.size() / 4);
}

TEST(Augment, TargetOnlyAddsOneChannel) {
  data::SynthSpec spec;
  spec.length = 200;
  spec.n_drivers = 2;
  const auto w = data::make_windows(data::synth_generate(spec), 16, 4);
  l1tf::AugmentStats stats;
  const auto a = l1tf::augment_with_trend(w, 0.5, l1tf::AugmentMode::TargetOnly, {}, &stats);
  ASSERT_EQ(a.size(), w.size());
  EXPECT_EQ(w[0].channels, 3u);
  EXPECT_EQ(a[0].channels, 4u);
  EXPECT_EQ(stats.solves, w.size());
  EXPECT_EQ(stats.nonconverged, 0u);
  const auto all = l1tf::augment_with_trend(w, 0.5, l1tf::AugmentMode::AllChannels);
  EXPECT_EQ(all[0].channels, 6u);
  // Original channels are untouched and trends follow in source order.
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_TRUE(std::equal(a[5].channel(c).begin(), a[5].channel(c).end(), w[5].channel(c).begin()));
  }
  const auto x1 = l1tf::solve(w[5].channel(1), 0.5).x;
  EXPECT_TRUE(std::equal(x1.begin(), x1.end(), all[5].channel(4).begin()));
}

TEST(Augment, AffineTargetReproduced) {
  data::Window w;
  w.channels = 1;
  w.input_steps = 10;
  w.inputs = affine(10, 2, 0.3);
  w.targets = {0};
  const auto a = l1tf::augment_with_trend(std::vector<data::Window>{w}, 1.0, l1tf::AugmentMode::TargetOnly);
  for (std::size_t t = 0; t < 10; ++t) EXPECT_NEAR(a[0].channel(1)[t], w.inputs[t], 1e-9);
}

TEST(Augment, Causal) {
  data::SynthSpec spec;
  spec.length = 120;
  auto s = data::synth_generate(spec);
  const auto before = l1tf::augment_with_trend(data::make_windows(s, 20, 5), 0.3, l1tf::AugmentMode::AllChannels);
  // Perturb every point outside window 40's input block.
  auto target = s.target();
  auto drivers = s.drivers();
  for (std::size_t t = 0; t < target.size(); ++t) {
    if (t >= 40 && t < 60) continue;
    target[t] += 5.0;
    for (auto& d : drivers) d[t] -= 3.0;
  }
  const data::MultivariateSeries mutated(s.timestamps(), target, drivers, s.names());
  const auto after = l1tf::augment_with_trend(data::make_windows(mutated, 20, 5), 0.3, l1tf::AugmentMode::AllChannels);
  EXPECT_EQ(before[40].inputs, after[40].inputs);
  EXPECT_NE(before[41].inputs, after[41].inputs);
}

TEST(Augment, SerialAndParallelAgree) {
  data::SynthSpec spec;
  spec.length = 400;
  const auto w = data::make_windows(data::synth_generate(spec), 32, 5);
  const auto a = l1tf::augment_with_trend(w, 0.2, l1tf::AugmentMode::AllChannels);
  const auto b = l1tf::serial::augment_with_trend(w, 0.2, l1tf::AugmentMode::AllChannels);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].inputs, b[i].inputs);
}

TEST(Augment, WholeSeriesSlicesOneSolve) {
  data::SynthSpec spec;
  spec.length = 150;
  const auto s = data::synth_generate(spec);
  const auto w = data::make_windows(s, 16, 4);
  l1tf::AugmentStats stats;
  const auto a = l1tf::augment_with_series_trend(w, s, 0.4, l1tf::AugmentMode::TargetOnly, {}, &stats);
  EXPECT_EQ(stats.solves, 1u);
  const auto x = l1tf::solve(s.target(), 0.4).x;
  for (std::size_t t = 0; t < 16; ++t) EXPECT_DOUBLE_EQ(a[30].channel(4)[t], x[30 + t]);
}

TEST(Augment, RejectsBadInput) {
  EXPECT_THROW(l1tf::augment_with_trend({}, 0.1, l1tf::AugmentMode::TargetOnly), InvalidArgument);
  data::Window w;
  w.channels = 1;
  w.input_steps = 4;
  w.inputs = {1, 2, 3, 4};
  w.targets = {5};
  EXPECT_THROW(l1tf::augment_with_trend(std::vector<data::Window>{w}, -1.0, l1tf::AugmentMode::TargetOnly),
               InvalidArgument);
}
