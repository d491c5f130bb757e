#include "trendfx/darnn.hpp"

#include <numeric>

namespace trendfx::models {

namespace {

std::size_t attended_count(const ModelConfig& c) {
  const std::size_t n = c.layout.channels() - 1;
  if (n == 0) throw InvalidArgument("darnn: needs at least one driving or trend channel");
  return n;
}

}  // namespace

DarnnParams DarnnParams::init(const ModelConfig& c) {
  const std::size_t T = c.input_steps, m = c.encoder_hidden, p = c.decoder_hidden;
  const std::size_t n = attended_count(c);
  if (T == 0 || m == 0 || p == 0) throw InvalidArgument("darnn: sizes must be positive");
  DarnnParams r;
  r.encoder = LstmParams::init(m, n, c.seed, "encoder.");
  r.decoder = LstmParams::init(p, 1, c.seed, "decoder.");
  auto u = [&](ad::Shape s, std::size_t fan_in, const char* name) {
    return ad::uniform_parameter(std::move(s), fan_in, c.seed, name);
  };
  r.v_e = u({1, T}, T, "v_e");
  r.W_e = u({T, 2 * m}, 2 * m, "W_e");
  r.U_e = u({T, T}, T, "U_e");
  r.v_d = u({1, m}, m, "v_d");
  r.W_d = u({m, 2 * p}, 2 * p, "W_d");
  r.U_d = u({m, m}, m, "U_d");
  r.w_tilde = u({1, 1 + m}, 1 + m, "w_tilde");
  r.b_tilde = u({1}, 1 + m, "b_tilde");
  r.W_y = u({p, p}, p, "W_y");
  r.b_w = u({p}, p, "b_w");
  r.v_y = u({1, p}, p, "v_y");
  r.b_v = u({1}, p, "b_v");
  return r;
}

std::vector<NamedTensor> DarnnParams::named() const {
  std::vector<NamedTensor> out;
  encoder.append_to(out, "encoder.");
  decoder.append_to(out, "decoder.");
  out.push_back({"v_e", v_e});
  out.push_back({"W_e", W_e});
  out.push_back({"U_e", U_e});
  out.push_back({"v_d", v_d});
  out.push_back({"W_d", W_d});
  out.push_back({"U_d", U_d});
  out.push_back({"w_tilde", w_tilde});
  out.push_back({"b_tilde", b_tilde});
  out.push_back({"W_y", W_y});
  out.push_back({"b_w", b_w});
  out.push_back({"v_y", v_y});
  out.push_back({"b_v", b_v});
  return out;
}

ad::Tensor darnn_input_attention(const ad::Tensor& ux, const LstmState& st, const DarnnParams& p,
                                 std::size_t n_series) {
  const std::size_t batch = st.h.rows();
  if (ux.rows() != batch * n_series || ux.cols() != p.U_e.dim(0)) {
    throw ShapeError("darnn_input_attention: projected inputs " + ad::to_string(ux.shape()));
  }
  const ad::Tensor query = ad::matmul_nt(ad::concat_cols({st.h, st.s}), p.W_e);  // [B, T]
  const ad::Tensor scores =
      ad::matmul_nt(ad::tanh(ad::add(ad::repeat_rows(query, n_series), ux)), p.v_e);  // [B*n, 1]
  return ad::softmax_rows(ad::reshape(scores, {batch, n_series}));
}

std::vector<double> darnn_input_attention(const std::vector<std::vector<double>>& x_columns,
                                          const LstmState& st, const DarnnParams& p) {
  const std::size_t n = x_columns.size();
  const std::size_t T = p.U_e.dim(0);
  std::vector<double> flat;
  for (const auto& col : x_columns) {
    if (col.size() != T) throw ShapeError("darnn_input_attention: series length differs from T");
    flat.insert(flat.end(), col.begin(), col.end());
  }
  const ad::Tensor ux = ad::matmul_nt(ad::Tensor::constant({n, T}, std::move(flat)), p.U_e);
  const ad::Tensor alpha = darnn_input_attention(ux, st, p, n);
  return {alpha.values().begin(), alpha.values().end()};
}

TemporalAttention darnn_temporal_attention(const ad::Tensor& encoder_states, const ad::Tensor& projected,
                                           const LstmState& dec, const DarnnParams& p) {
  if (encoder_states.shape().size() != 3) throw ShapeError("darnn_temporal_attention: states must be [B, T, m]");
  const std::size_t batch = encoder_states.dim(0), T = encoder_states.dim(1), m = encoder_states.dim(2);
  if (projected.rows() != batch * T || projected.cols() != m || dec.h.rows() != batch) {
    throw ShapeError("darnn_temporal_attention: inconsistent shapes");
  }
  const ad::Tensor query = ad::matmul_nt(ad::concat_cols({dec.h, dec.s}), p.W_d);  // [B, m]
  const ad::Tensor scores = ad::matmul_nt(ad::tanh(ad::add(ad::repeat_rows(query, T), projected)), p.v_d);
  TemporalAttention out;
  out.weights = ad::softmax_rows(ad::reshape(scores, {batch, T}));
  out.context = ad::reshape(ad::bmm(ad::reshape(out.weights, {batch, 1, T}), encoder_states), {batch, m});
  return out;
}

Darnn::Darnn(ModelConfig config) : NeuralForecaster(std::move(config)), params_(DarnnParams::init(this->config())) {}

Darnn::Darnn(ModelConfig config, DarnnParams params)
    : NeuralForecaster(std::move(config)), params_(std::move(params)) {}

std::vector<std::size_t> Darnn::attended_channels() const {
  std::vector<std::size_t> out(config().layout.channels() - 1);
  std::iota(out.begin(), out.end(), std::size_t{1});
  return out;
}

ad::Tensor Darnn::forward(const WindowBatch& batch, DarnnTrace* trace) const {
  check_batch(batch);
  const auto& c = config();
  const std::size_t B = batch.batch, T = c.input_steps, m = c.encoder_hidden, p = c.decoder_hidden;
  const auto cols = attended_channels();
  const std::size_t n = cols.size();
  const auto& P = params_;

  const auto xa = batch.select(cols);  // [B, n, T] == [B*n, T]
  const ad::Tensor ux = ad::matmul_nt(ad::Tensor::constant({B * n, T}, xa), P.U_e);

  LstmState enc = LstmState::zeros(B, m);
  std::vector<ad::Tensor> states;
  states.reserve(T);
  std::vector<double> xt(B * n);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t k = 0; k < n; ++k) xt[b * n + k] = xa[(b * n + k) * T + t];
    ad::Tensor x = ad::Tensor::constant({B, n}, xt);
    if (c.input_attention) {
      const ad::Tensor alpha = darnn_input_attention(ux, enc, P, n);
      if (trace) trace->input_weights.emplace_back(alpha.values().begin(), alpha.values().end());
      x = ad::mul(alpha, x);
    }
    enc = lstm_step(x, enc, P.encoder);
    states.push_back(enc.h);
  }
  const ad::Tensor flat = ad::reshape(ad::concat_cols(states), {B * T, m});  // row b*T + i = h_i[b]
  const ad::Tensor projected = ad::matmul_nt(flat, P.U_d);
  const ad::Tensor hs = ad::reshape(flat, {B, T, m});

  LstmState dec = LstmState::zeros(B, p);
  auto decoder_step = [&](const ad::Tensor& y_prev) {
    const TemporalAttention att = darnn_temporal_attention(hs, projected, dec, P);
    if (trace) trace->temporal_weights.emplace_back(att.weights.values().begin(), att.weights.values().end());
    const ad::Tensor y_in = ad::dense(ad::concat_cols({y_prev, att.context}), P.w_tilde, P.b_tilde);
    dec = lstm_step(y_in, dec, P.decoder);
  };

  // Observed target history drives the decoder through the input window.
  std::vector<double> yt(B);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t b = 0; b < B; ++b) yt[b] = batch.at(b, 0, t);
    decoder_step(ad::Tensor::constant({B, 1}, yt));
  }
  std::vector<ad::Tensor> outputs;
  for (std::size_t j = 0; j < c.output_steps; ++j) {
    const ad::Tensor y_hat = ad::dense(ad::dense(dec.h, P.W_y, P.b_w), P.v_y, P.b_v);  // [B, 1]
    outputs.push_back(y_hat);
    if (j + 1 < c.output_steps) decoder_step(y_hat);
  }
  return ad::concat_cols(outputs);
}

}  // namespace trendfx::models
