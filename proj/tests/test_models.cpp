#include <gtest/gtest.h>

#include <cmath>

#include "model_fixtures.hpp"
#include "trendfx/darnn.hpp"
#include "trendfx/dsanet.hpp"
#include "trendfx/fcn.hpp"
#include "trendfx/lstm.hpp"

using namespace trendfx;
using namespace trendfx::models;
using ad::Tensor;

namespace {

void fill(Tensor t, double v) {
  for (auto& x : t.mutable_values()) x = v;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

TEST(Lstm, ZeroEverythingGivesZeroState) {
  auto p = LstmParams::init(3, 2, 1, "");
  for (auto t : {p.w_forget, p.w_input, p.w_output, p.w_state, p.b_forget, p.b_input, p.b_output, p.b_state}) fill(t, 0);
  const auto next = lstm_step(Tensor::zeros({1, 2}), LstmState::zeros(1, 3), p);
  for (double v : next.h.values()) EXPECT_EQ(v, 0.0);
  for (double v : next.s.values()) EXPECT_EQ(v, 0.0);
}

TEST(Lstm, MatchesScalarEquations) {
  auto p = LstmParams::init(1, 1, 3, "");
  const double h0 = 0.3, s0 = -0.2, x = 0.7;
  const auto next = lstm_step(Tensor::constant({1, 1}, {x}), {Tensor::constant({1, 1}, {h0}), Tensor::constant({1, 1}, {s0})}, p);
  auto gate = [&](const Tensor& w, const Tensor& b) { return w.values()[0] * h0 + w.values()[1] * x + b.values()[0]; };
  const double f = sigmoid(gate(p.w_forget, p.b_forget));
  const double i = sigmoid(gate(p.w_input, p.b_input));
  const double o = sigmoid(gate(p.w_output, p.b_output));
  const double s = f * s0 + i * std::tanh(gate(p.w_state, p.b_state));
  EXPECT_NEAR(next.s.values()[0], s, 1e-15);
  EXPECT_NEAR(next.h.values()[0], o * std::tanh(s), 1e-15);
}

TEST(Lstm, HiddenBoundedAndGradient) {
  auto p = LstmParams::init(4, 3, 5, "");
  std::mt19937_64 rng(6);
  auto x = Tensor::parameter({2, 3}, oracle::normal_vector(6, rng, 50.0));
  auto h = Tensor::parameter({2, 4}, oracle::normal_vector(8, rng));
  auto s = Tensor::parameter({2, 4}, oracle::normal_vector(8, rng));
  const auto big = lstm_step(x, {h, s}, p);
  for (double v : big.h.values()) EXPECT_LE(std::abs(v), 1.0);
  auto xs = Tensor::parameter({2, 3}, oracle::normal_vector(6, rng));
  std::vector<Tensor> wrt{xs, h, s, p.w_forget, p.w_input, p.w_output, p.w_state, p.b_forget, p.b_input, p.b_output, p.b_state};
  const auto r = oracle::grad_check(
      [&] {
        const auto n = lstm_step(xs, {h, s}, p);
        return ad::add(ad::sum_all(ad::mul(n.h, n.h)), ad::sum_all(ad::tanh(n.s)));
      },
      wrt);
  EXPECT_LE(r.max_rel_error, 1e-4);
  EXPECT_THROW(lstm_step(Tensor::zeros({2, 2}), LstmState::zeros(2, 4), p), ShapeError);
}

TEST(DarnnInputAttention, IdenticalSeriesUniform) {
  const auto p = DarnnParams::init(fixtures::tiny("darnn"));
  const std::vector<double> series{0.1, -0.4, 0.8, 0.2, 1.0, -0.3};
  std::mt19937_64 rng(2);
  LstmState st{Tensor::constant({1, 3}, oracle::normal_vector(3, rng)), Tensor::constant({1, 3}, oracle::normal_vector(3, rng))};
  for (double a : darnn_input_attention({series, series, series}, st, p)) EXPECT_NEAR(a, 1.0 / 3.0, 1e-15);
  const auto single = darnn_input_attention({series}, st, p);
  ASSERT_EQ(single.size(), 1u);
  EXPECT_DOUBLE_EQ(single[0], 1.0);
}

TEST(DarnnInputAttention, HandEvaluation) {
  auto c = fixtures::tiny("darnn");
  c.input_steps = 3;
  c.encoder_hidden = 1;
  const auto p = DarnnParams::init(c);
  // Small hand-set weights.
  const std::vector<double> v_e{0.2, -0.1, 0.3}, W_e{0.1, -0.2, 0.05, 0.3, -0.1, 0.2};
  const std::vector<double> U_e{0.1, 0.0, -0.2, 0.3, 0.1, 0.0, -0.1, 0.2, 0.4};
  std::copy(v_e.begin(), v_e.end(), p.v_e.node()->value.begin());
  std::copy(W_e.begin(), W_e.end(), p.W_e.node()->value.begin());
  std::copy(U_e.begin(), U_e.end(), p.U_e.node()->value.begin());
  const double h = 0.5, s = -0.25;
  const std::vector<std::vector<double>> x{{1.0, 2.0, -1.0}, {0.5, -0.5, 0.25}};
  std::vector<double> e(2);
  for (std::size_t k = 0; k < 2; ++k) {
    for (std::size_t r = 0; r < 3; ++r) {
      double pre = W_e[r * 2] * h + W_e[r * 2 + 1] * s;
      for (std::size_t j = 0; j < 3; ++j) pre += U_e[r * 3 + j] * x[k][j];
      e[k] += v_e[r] * std::tanh(pre);
    }
  }
  const double z = std::exp(e[0]) + std::exp(e[1]);
  const auto alpha = darnn_input_attention(x, {Tensor::constant({1, 1}, {h}), Tensor::constant({1, 1}, {s})}, p);
  EXPECT_NEAR(alpha[0], std::exp(e[0]) / z, 1e-10);
  EXPECT_NEAR(alpha[1], std::exp(e[1]) / z, 1e-10);
}

TEST(DarnnTemporalAttention, ConvexCombination) {
  const auto c = fixtures::tiny("darnn");
  const auto p = DarnnParams::init(c);
  std::mt19937_64 rng(3);
  const auto h = oracle::normal_vector(3, rng);
  std::vector<double> states;
  for (int i = 0; i < 6; ++i) states.insert(states.end(), h.begin(), h.end());
  const Tensor hs = Tensor::constant({1, 6, 3}, states);
  const Tensor proj = ad::matmul_nt(ad::reshape(hs, {6, 3}), p.U_d);
  LstmState dec{Tensor::constant({1, 4}, oracle::normal_vector(4, rng)), Tensor::constant({1, 4}, oracle::normal_vector(4, rng))};
  const auto att = darnn_temporal_attention(hs, proj, dec, p);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(att.context.values()[j], h[j], 1e-14);
  double sum = 0;
  for (double b : att.weights.values()) sum += b;
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(DarnnTemporalAttention, SingleStepAndHandInstance) {
  auto c = fixtures::tiny("darnn");
  c.encoder_hidden = 1;
  c.decoder_hidden = 1;
  const auto p = DarnnParams::init(c);
  LstmState dec{Tensor::constant({1, 1}, {0.4}), Tensor::constant({1, 1}, {-0.6})};
  const Tensor one = Tensor::constant({1, 1, 1}, {0.9});
  const auto a1 = darnn_temporal_attention(one, ad::matmul_nt(ad::reshape(one, {1, 1}), p.U_d), dec, p);
  EXPECT_DOUBLE_EQ(a1.weights.item(), 1.0);
  EXPECT_DOUBLE_EQ(a1.context.item(), 0.9);

  const std::vector<double> h{0.3, -0.7};
  const Tensor two = Tensor::constant({1, 2, 1}, h);
  const auto a2 = darnn_temporal_attention(two, ad::matmul_nt(ad::reshape(two, {2, 1}), p.U_d), dec, p);
  const double wd0 = p.W_d.values()[0], wd1 = p.W_d.values()[1], ud = p.U_d.values()[0], vd = p.v_d.values()[0];
  double l[2];
  for (int i = 0; i < 2; ++i) l[i] = vd * std::tanh(wd0 * 0.4 + wd1 * -0.6 + ud * h[static_cast<std::size_t>(i)]);
  const double b0 = std::exp(l[0]) / (std::exp(l[0]) + std::exp(l[1]));
  EXPECT_NEAR(a2.weights.values()[0], b0, 1e-14);
  EXPECT_NEAR(a2.context.item(), b0 * h[0] + (1 - b0) * h[1], 1e-14);
}

TEST(Darnn, OutputShapeAndWeights) {
  const Darnn model(fixtures::tiny("darnn"));
  const auto batch = fixtures::random_batch(3, 3, 6, 2, 4);
  DarnnTrace trace;
  const auto y = model.forward(batch, &trace);
  EXPECT_EQ(y.shape(), (ad::Shape{3, 2}));
  EXPECT_EQ(trace.input_weights.size(), 6u);
  EXPECT_EQ(trace.temporal_weights.size(), 6u + 1u);
  for (const auto& w : trace.input_weights) {
    for (std::size_t b = 0; b < 3; ++b) EXPECT_NEAR(w[b * 2] + w[b * 2 + 1], 1.0, 1e-12);
  }
  EXPECT_THROW(model.forward(fixtures::random_batch(1, 4, 6, 2, 1)), ShapeError);
}

TEST(Darnn, SingleSeriesAttentionIsIdentity) {
  auto c = fixtures::tiny("darnn");
  c.layout.n_drivers = 1;
  Darnn with(c);
  c.input_attention = false;
  Darnn without(c, with.params());
  const auto batch = fixtures::random_batch(2, 2, 6, 2, 5);
  const auto a = with.forward(batch), b = without.forward(batch);
  for (std::size_t i = 0; i < a.numel(); ++i) EXPECT_DOUBLE_EQ(a.values()[i], b.values()[i]);
}

TEST(Darnn, DriverPermutationSymmetry) {
  auto c = fixtures::tiny("darnn");
  c.layout.n_drivers = 3;
  const Darnn model(c);
  auto batch = fixtures::random_batch(2, 4, 6, 2, 6);
  const auto before = model.forward(batch);
  // Rotate drivers (1,2,3) -> (2,3,1) and the encoder input columns to match.
  const std::vector<std::size_t> perm{2, 3, 1};
  auto permuted = batch;
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t k = 0; k < 3; ++k)
      for (std::size_t t = 0; t < 6; ++t) permuted.inputs[(b * 4 + 1 + k) * 6 + t] = batch.at(b, perm[k], t);
  DarnnParams moved = model.params();
  const std::size_t m = c.encoder_hidden, width = m + 3;
  for (Tensor* w : {&moved.encoder.w_forget, &moved.encoder.w_input, &moved.encoder.w_output, &moved.encoder.w_state}) {
    std::vector<double> v(w->values().begin(), w->values().end());
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t k = 0; k < 3; ++k) v[r * width + m + k] = w->values()[r * width + m + perm[k] - 1];
    *w = Tensor::parameter(w->shape(), v);
  }
  const Darnn other(c, moved);
  const auto after = other.forward(permuted);
  for (std::size_t i = 0; i < before.numel(); ++i) EXPECT_NEAR(after.values()[i], before.values()[i], 1e-13);
}

TEST(Darnn, NeedsAnAttendedChannel) {
  auto c = fixtures::tiny("darnn");
  c.layout.n_drivers = 0;
  EXPECT_THROW(Darnn{c}, InvalidArgument);
  c.layout.trend_sources = {0};
  EXPECT_NO_THROW(Darnn{c});
}

TEST(Darnn, GradientCheck) {
  auto c = fixtures::tiny("darnn");
  c.input_steps = 4;
  const Darnn model(c);
  EXPECT_LE(fixtures::model_grad_error(model, fixtures::random_batch(2, 3, 4, 2, 7)), 1e-4);
}

TEST(Dsanet, AttentionRowsAreSimplex) {
  const Dsanet model(fixtures::tiny("dsanet"));
  DsanetTrace trace;
  model.forward(fixtures::random_batch(3, 3, 6, 2, 8), &trace);
  for (const auto* probs : {&trace.global_attention, &trace.local_attention}) {
    ASSERT_EQ(probs->size(), 3u * 2u * 3u * 3u);
    for (std::size_t r = 0; r < probs->size() / 3; ++r) {
      double sum = 0;
      for (std::size_t j = 0; j < 3; ++j) {
        EXPECT_GE((*probs)[r * 3 + j], 0.0);
        sum += (*probs)[r * 3 + j];
      }
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
  }
}

TEST(Dsanet, ZeroHeadLeavesAutoregression) {
  Dsanet model(fixtures::tiny("dsanet"));
  fill(model.params().head_w, 0);
  fill(model.params().head_b, 0);
  const auto batch = fixtures::random_batch(4, 3, 6, 2, 9);
  const auto y = model.forward(batch), ar = model.autoregressive(batch);
  for (std::size_t i = 0; i < y.numel(); ++i) EXPECT_EQ(y.values()[i], ar.values()[i]);
}

TEST(Dsanet, RejectsBadConfig) {
  auto c = fixtures::tiny("dsanet");
  c.local_kernel = 6;
  EXPECT_THROW(Dsanet{c}, InvalidArgument);
  c = fixtures::tiny("dsanet");
  c.n_head = 3;
  EXPECT_THROW(Dsanet{c}, InvalidArgument);
}

TEST(Dsanet, GradientCheck) {
  const Dsanet model(fixtures::tiny("dsanet"));
  EXPECT_LE(fixtures::model_grad_error(model, fixtures::random_batch(2, 3, 6, 2, 10)), 1e-4);
}

TEST(Fcn, LayerLengths) {
  EXPECT_EQ(fcn_lengths(64, {7, 5, 3}), (std::vector<std::size_t>{58, 54, 52}));
  EXPECT_EQ(fcn_lengths(13, {7, 5, 3}), (std::vector<std::size_t>{7, 3, 1}));
  EXPECT_THROW(fcn_lengths(12, {7, 5, 3}), InvalidArgument);
  ModelConfig c;
  c.input_steps = 64;
  const Fcn model(c);
  EXPECT_EQ(model.params().head_w.shape(), (ad::Shape{5, 32 * 52}));
}

TEST(Fcn, UsesTargetAndItsTrendsOnly) {
  auto c = fixtures::tiny("fcn");
  c.layout.trend_sources = {0, 1, 2};
  const Fcn model(c);
  EXPECT_EQ(model.input_channels(), (std::vector<std::size_t>{0, 3}));
  EXPECT_EQ(model.params().conv_w[0].dim(1), 2u);
  // Drivers do not influence the output.
  auto batch = fixtures::random_batch(2, 6, 6, 2, 11);
  const auto a = model.forward(batch);
  for (std::size_t t = 0; t < 6; ++t) batch.inputs[(0 * 6 + 1) * 6 + t] += 10.0;
  const auto b = model.forward(batch);
  for (std::size_t i = 0; i < a.numel(); ++i) EXPECT_EQ(a.values()[i], b.values()[i]);
}

TEST(Fcn, ZeroWeightsGiveHeadBias) {
  Fcn model(fixtures::tiny("fcn"));
  for (auto& [name, t] : model.named_parameters()) {
    if (name != "head.b") fill(t, 0);
  }
  const auto y = model.forward(fixtures::random_batch(3, 3, 6, 2, 12));
  for (std::size_t b = 0; b < 3; ++b)
    for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(y.values()[b * 2 + j], model.params().head_b.values()[j]);
}

TEST(Fcn, GradientCheck) {
  const Fcn model(fixtures::tiny("fcn"));
  EXPECT_LE(fixtures::model_grad_error(model, fixtures::random_batch(2, 3, 6, 2, 13)), 1e-4);
}

TEST(Models, FiniteForLargeInputs) {
  for (const char* family : {"darnn", "dsanet", "fcn"}) {
    auto model = make_model(fixtures::tiny(family));
    auto batch = fixtures::random_batch(2, 3, 6, 2, 14);
    for (auto& v : batch.inputs) v *= 1000.0;
    for (double v : model->forward(batch).values()) EXPECT_TRUE(std::isfinite(v)) << family;
  }
}

TEST(Models, Factory) {
  EXPECT_EQ(make_model(fixtures::tiny("fcn"))->family(), "fcn");
  EXPECT_THROW(make_model(fixtures::tiny("lstm")), InvalidArgument);
  const auto m = make_model(fixtures::tiny("dsanet"));
  EXPECT_GT(m->parameter_count(), 0u);
  data::Window w;
  w.channels = 3;
  w.input_steps = 6;
  w.inputs.assign(18, 0.5);
  w.targets = {0, 0};
  EXPECT_EQ(m->predict(w).size(), 2u);
  EXPECT_EQ(m->predict_all(std::vector<data::Window>(5, w), 2).size(), 5u);
}
