#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <random>

#include "model_fixtures.hpp"
#include "trendfx/arima.hpp"
#include "trendfx/checkpoint.hpp"
#include "trendfx/fcn.hpp"
#include "trendfx/lookahead.hpp"
#include "trendfx/train.hpp"

using namespace trendfx;
using namespace trendfx::models;

namespace {

std::vector<double> simulate_ar(const std::vector<double>& phi, double c, std::size_t n, std::uint64_t seed,
                                double sd = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> e(0.0, sd);
  std::vector<double> y(n + 200, 0.0);
  for (std::size_t t = phi.size(); t < y.size(); ++t) {
    double v = c + e(rng);
    for (std::size_t i = 0; i < phi.size(); ++i) v += phi[i] * y[t - 1 - i];
    y[t] = v;
  }
  return {y.end() - static_cast<std::ptrdiff_t>(n), y.end()};
}

// Least squares on [1, y_{t-1}, ..., y_{t-p}] via normal equations.
Eigen::VectorXd ar_normal_equations(const std::vector<double>& y, std::size_t p) {
  const std::size_t rows = y.size() - p;
  Eigen::MatrixXd X(rows, p + 1);
  Eigen::VectorXd b(rows);
  for (std::size_t t = p; t < y.size(); ++t) {
    X(t - p, 0) = 1.0;
    for (std::size_t i = 1; i <= p; ++i) X(t - p, i) = y[t - i];
    b(t - p) = y[t];
  }
  return (X.transpose() * X).ldlt().solve(X.transpose() * b);
}

std::vector<data::Window> sine_windows(std::size_t count, std::size_t steps) {
  std::vector<data::Window> out;
  for (std::size_t i = 0; i < count; ++i) {
    data::Window w;
    w.channels = 1;
    w.input_steps = steps;
    for (std::size_t t = 0; t < steps; ++t) w.inputs.push_back(std::sin(0.3 * static_cast<double>(i + t)));
    w.targets = {std::sin(0.3 * static_cast<double>(i + steps))};
    w.origin_index = i;
    out.push_back(std::move(w));
  }
  return out;
}

ModelConfig sine_fcn() {
  ModelConfig c;
  c.family = "fcn";
  c.input_steps = 12;
  c.output_steps = 1;
  c.fcn_filters = 4;
  c.fcn_kernels = {3, 3, 2};
  c.seed = 3;
  return c;
}

}  // namespace

TEST(Arima, Ar1MatchesLeastSquaresAndTruth) {
  const auto y = simulate_ar({0.8}, 0.5, 5000, 1);
  const auto m = arima_fit(y, 1, 0);
  const auto ref = ar_normal_equations(y, 1);
  EXPECT_NEAR(m.intercept, ref(0), 1e-9);
  EXPECT_NEAR(m.phi[0], ref(1), 1e-9);
  EXPECT_NEAR(m.phi[0], 0.8, 0.03);
  EXPECT_NEAR(m.intercept / (1 - m.phi[0]), 2.5, 0.3);
  EXPECT_NEAR(m.residual_variance, 1.0, 0.06);
}

TEST(Arima, Ar2Recovery) {
  const auto y = simulate_ar({0.5, -0.3}, 0.0, 8000, 2);
  const auto m = arima_fit(y, 2, 0);
  EXPECT_NEAR(m.phi[0], 0.5, 0.03);
  EXPECT_NEAR(m.phi[1], -0.3, 0.03);
  const auto ref = ar_normal_equations(y, 2);
  EXPECT_NEAR(m.phi[1], ref(2), 1e-9);
}

TEST(Arima, WhiteNoiseHasNoMemory) {
  const auto y = simulate_ar({}, 0.0, 4000, 3);
  const auto m = arima_fit(y, 1, 0);
  EXPECT_LT(std::abs(m.phi[0]), 3.0 / std::sqrt(4000.0));
}

TEST(Arima, ConstantSeries) {
  const std::vector<double> y(50, 7.0);
  const auto m = arima_fit(y, 1, 0);
  EXPECT_EQ(m.intercept, 7.0);
  EXPECT_EQ(m.phi[0], 0.0);
  EXPECT_EQ(arima_forecast(m, y, 3), (std::vector<double>{7, 7, 7}));
}

TEST(Arima, ForecastRecursion) {
  ArimaModel m;
  m.phi = {0.5};
  EXPECT_EQ(arima_forecast(m, std::vector<double>{8.0}, 3), (std::vector<double>{4, 2, 1}));
  m.intercept = 1.0;
  m.p = 2;
  m.phi = {0.5, 0.25};
  const auto f = arima_forecast(m, std::vector<double>{4.0, 2.0}, 2);
  EXPECT_DOUBLE_EQ(f[0], 1 + 0.5 * 2 + 0.25 * 4);
  EXPECT_DOUBLE_EQ(f[1], 1 + 0.5 * f[0] + 0.25 * 2);
  EXPECT_THROW(arima_forecast(m, std::vector<double>{1.0}, 1), InvalidArgument);
}

TEST(Arima, RandomWalk) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> e;
  std::vector<double> y{0.0};
  for (int i = 0; i < 3000; ++i) y.push_back(y.back() + e(rng));
  EXPECT_NEAR(arima_fit(y, 1, 0).phi[0], 1.0, 0.02);
}

TEST(Arima, ShiftEquivariance) {
  auto y = simulate_ar({0.6}, 0.0, 500, 5);
  const auto a = arima_fit(y, 1, 0);
  for (auto& v : y) v += 100.0;
  const auto b = arima_fit(y, 1, 0);
  EXPECT_NEAR(a.phi[0], b.phi[0], 1e-9);
  EXPECT_NEAR(b.intercept - a.intercept, 100.0 * (1 - a.phi[0]), 1e-6);
}

TEST(Arima, Ma1Recovery) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> e;
  std::vector<double> y;
  double prev = 0;
  for (int i = 0; i < 8000; ++i) {
    const double cur = e(rng);
    y.push_back(0.2 + cur - 0.5 * prev);  // theta_1 = 0.5 under y = c + e - theta e_{t-1}
    prev = cur;
  }
  const auto m = arima_fit(y, 0, 1);
  ASSERT_EQ(m.theta.size(), 1u);
  EXPECT_NEAR(m.theta[0], 0.5, 0.05);
  EXPECT_GE(m.ma_iterations, 1u);
  const auto r = arima_residuals(m, y);
  EXPECT_EQ(r.size(), y.size());
}

TEST(Arima, Errors) {
  std::vector<double> affine;
  for (int i = 0; i < 100; ++i) affine.push_back(2.0 + 0.5 * i);
  EXPECT_THROW(arima_fit(affine, 2, 0), SingularDesignError);
  EXPECT_THROW(arima_fit(std::vector<double>(19, 1.0), 1, 0), InvalidArgument);
}

TEST(Arima, ForecasterReadsTargetChannel) {
  ArimaModel m;
  m.phi = {0.5};
  const ArimaForecaster f(m, 2);
  data::Window w;
  w.channels = 2;
  w.input_steps = 3;
  w.inputs = {1, 2, 4, 9, 9, 9};
  EXPECT_EQ(f.predict(w), (std::vector<double>{2, 1}));
}

TEST(Lookahead, Examples) {
  const std::vector<double> p{10, 11, 12, 11, 11};
  const auto r = lookahead_predict(p, 1);
  EXPECT_EQ(r.positions, (std::vector<int>{1, 1, -1, 0, 0}));
  EXPECT_EQ(r.predicted, (std::vector<double>{10, 11, 12, 11}));
  EXPECT_EQ(r.actual, (std::vector<double>{11, 12, 11, 11}));
  const auto r2 = lookahead_predict(p, 2);
  EXPECT_EQ(r2.positions, (std::vector<int>{1, 0, -1, 0, 0}));
  EXPECT_EQ(lookahead_predict(p, 5).predicted.size(), 0u);
  EXPECT_THROW(lookahead_predict(p, 0), InvalidArgument);
}

TEST(Lookahead, SignOfMove) {
  std::mt19937_64 rng(7);
  const auto p = oracle::normal_vector(200, rng);
  const auto r = lookahead_predict(p, 3);
  for (std::size_t t = 0; t + 3 < p.size(); ++t) {
    const double move = r.actual[t] - r.predicted[t];
    EXPECT_EQ(r.positions[t], (move > 0) - (move < 0));
    EXPECT_EQ(r.actual[t], p[t + 3]);
  }
}

TEST(Train, LossDecreasesAndIsDeterministic) {
  const auto windows = sine_windows(60, 12);
  TrainConfig tc;
  tc.epochs = 40;
  tc.batch_size = 8;
  tc.lr = 1e-2;
  tc.seed = 9;
  Fcn a(sine_fcn()), b(sine_fcn());
  const double before = mean_loss(a, windows);
  const auto ra = train(a, windows, tc);
  const auto rb = train(b, windows, tc);
  EXPECT_EQ(ra.loss_curve, rb.loss_curve);
  EXPECT_EQ(ra.steps, 40u * 8u);
  EXPECT_LT(mean_loss(a, windows), before / 10);
  EXPECT_LT(std::sqrt(mean_loss(a, windows)), 0.05);
  EXPECT_EQ(a.predict(windows[5]), b.predict(windows[5]));
}

TEST(Train, DivergenceIsReported) {
  auto windows = sine_windows(10, 12);
  for (auto& w : windows) w.targets[0] = 1e200;
  Fcn model(sine_fcn());
  EXPECT_THROW(train(model, windows, TrainConfig{}), TrainingDivergedError);
  EXPECT_THROW(train(model, {}, TrainConfig{}), InvalidArgument);
}

TEST(Checkpoint, RoundTripIsExact) {
  for (const char* family : {"darnn", "dsanet", "fcn"}) {
    const auto model = make_model(fixtures::tiny(family, 21));
    const auto text = checkpoint_to_string(*model);
    const auto back = checkpoint_from_string(text);
    EXPECT_EQ(back->config(), model->config());
    const auto batch = fixtures::random_batch(2, 3, 6, 2, 22);
    const auto x = model->forward(batch), y = back->forward(batch);
    for (std::size_t i = 0; i < x.numel(); ++i) EXPECT_EQ(x.values()[i], y.values()[i]) << family;
    EXPECT_EQ(checkpoint_to_string(*back), text);
  }
  const auto path = std::filesystem::temp_directory_path() / "trendfx_ckpt_test.json";
  const auto model = make_model(fixtures::tiny("fcn"));
  save_checkpoint(path, *model);
  EXPECT_EQ(load_checkpoint(path)->parameter_count(), model->parameter_count());
  std::filesystem::remove(path);
}

TEST(Checkpoint, RejectsBadDocuments) {
  EXPECT_THROW(checkpoint_from_string("not json"), CheckpointError);
  EXPECT_THROW(checkpoint_from_string(R"({"format":"other","version":1})"), CheckpointError);
  const auto text = checkpoint_to_string(*make_model(fixtures::tiny("fcn")));
  auto doc = nlohmann::json::parse(text);
  doc["version"] = 9;
  EXPECT_THROW(checkpoint_from_string(doc.dump()), CheckpointError);
  doc = nlohmann::json::parse(text);
  doc["tensors"].erase(doc["tensors"].size() - 1);
  EXPECT_THROW(checkpoint_from_string(doc.dump()), CheckpointError);
  doc = nlohmann::json::parse(text);
  doc["tensors"][0]["values"].erase(0);
  EXPECT_THROW(checkpoint_from_string(doc.dump()), CheckpointError);
  EXPECT_THROW(load_checkpoint("/nonexistent/ckpt.json"), CheckpointError);
}
