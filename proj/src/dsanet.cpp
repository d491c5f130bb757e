#include "trendfx/dsanet.hpp"

#include <cmath>

namespace trendfx::models {

namespace {

void validate(const ModelConfig& c) {
  if (c.local_kernel == 0 || c.local_kernel >= c.input_steps) {
    throw InvalidArgument("dsanet: local kernel must satisfy 0 < l < input_steps");
  }
  if (c.n_head == 0 || c.dsanet_filters % c.n_head != 0) {
    throw InvalidArgument("dsanet: filter count must be a multiple of n_head");
  }
  if (c.ar_window == 0 || c.ar_window > c.input_steps) throw InvalidArgument("dsanet: ar_window out of range");
  if (c.ffn_dim == 0) throw InvalidArgument("dsanet: ffn_dim must be positive");
}

AttentionBlockParams init_block(const ModelConfig& c, const std::string& prefix) {
  const std::size_t F = c.dsanet_filters, H = c.ffn_dim;
  auto u = [&](ad::Shape s, std::size_t fan_in, const char* name) {
    return ad::uniform_parameter(std::move(s), fan_in, c.seed, prefix + name);
  };
  auto filled = [&](double v) { return ad::Tensor::parameter({F}, std::vector<double>(F, v)); };
  AttentionBlockParams b;
  b.W_q = u({F, F}, F, "W_q");
  b.W_k = u({F, F}, F, "W_k");
  b.W_v = u({F, F}, F, "W_v");
  b.W_o = u({F, F}, F, "W_o");
  b.ln1_gain = filled(1.0);
  b.ln1_bias = filled(0.0);
  b.W_1 = u({H, F}, F, "W_1");
  b.b_1 = u({H}, F, "b_1");
  b.W_2 = u({F, H}, H, "W_2");
  b.b_2 = u({F}, H, "b_2");
  b.ln2_gain = filled(1.0);
  b.ln2_bias = filled(0.0);
  return b;
}

void append_block(std::vector<NamedTensor>& out, const AttentionBlockParams& b, const std::string& prefix) {
  out.push_back({prefix + "W_q", b.W_q});
  out.push_back({prefix + "W_k", b.W_k});
  out.push_back({prefix + "W_v", b.W_v});
  out.push_back({prefix + "W_o", b.W_o});
  out.push_back({prefix + "ln1_gain", b.ln1_gain});
  out.push_back({prefix + "ln1_bias", b.ln1_bias});
  out.push_back({prefix + "W_1", b.W_1});
  out.push_back({prefix + "b_1", b.b_1});
  out.push_back({prefix + "W_2", b.W_2});
  out.push_back({prefix + "b_2", b.b_2});
  out.push_back({prefix + "ln2_gain", b.ln2_gain});
  out.push_back({prefix + "ln2_bias", b.ln2_bias});
}

}  // namespace

DsanetParams DsanetParams::init(const ModelConfig& c) {
  validate(c);
  const std::size_t F = c.dsanet_filters, T = c.input_steps, l = c.local_kernel;
  const std::size_t C = c.layout.channels();
  auto u = [&](ad::Shape s, std::size_t fan_in, const char* name) {
    return ad::uniform_parameter(std::move(s), fan_in, c.seed, name);
  };
  DsanetParams p;
  p.global_w = u({F, T}, T, "global.W");
  p.global_b = u({F}, T, "global.b");
  p.local_w = u({F, 1, l}, l, "local.W");
  p.local_b = u({F}, l, "local.b");
  p.global_block = init_block(c, "global.attn.");
  p.local_block = init_block(c, "local.attn.");
  p.head_w = u({c.output_steps, C * 2 * F}, C * 2 * F, "head.W");
  p.head_b = u({c.output_steps}, C * 2 * F, "head.b");
  p.ar_w = u({c.output_steps, c.ar_window}, c.ar_window, "ar.W");
  p.ar_b = u({c.output_steps}, c.ar_window, "ar.b");
  return p;
}

std::vector<NamedTensor> DsanetParams::named() const {
  std::vector<NamedTensor> out{{"global.W", global_w}, {"global.b", global_b},
                               {"local.W", local_w},   {"local.b", local_b}};
  append_block(out, global_block, "global.attn.");
  append_block(out, local_block, "local.attn.");
  out.push_back({"head.W", head_w});
  out.push_back({"head.b", head_b});
  out.push_back({"ar.W", ar_w});
  out.push_back({"ar.b", ar_b});
  return out;
}

Dsanet::Dsanet(ModelConfig config) : NeuralForecaster(std::move(config)), params_(DsanetParams::init(this->config())) {}

ad::Tensor Dsanet::block(const ad::Tensor& z, const AttentionBlockParams& p, std::size_t batch, std::size_t series,
                         std::vector<double>* attention) const {
  const auto& c = config();
  const std::size_t F = c.dsanet_filters, heads = c.n_head, dk = F / heads;
  auto split = [&](const ad::Tensor& t) {
    return ad::reshape(ad::swap_middle_axes(t, batch, series, heads, dk), {batch * heads, series, dk});
  };
  const ad::Tensor q = split(ad::matmul_nt(z, p.W_q));
  const ad::Tensor k = split(ad::matmul_nt(z, p.W_k));
  const ad::Tensor v = split(ad::matmul_nt(z, p.W_v));
  const ad::Tensor probs = ad::softmax_rows(ad::scale(ad::bmm_nt(q, k), 1.0 / std::sqrt(static_cast<double>(dk))));
  if (attention) attention->assign(probs.values().begin(), probs.values().end());
  const ad::Tensor mixed =
      ad::reshape(ad::swap_middle_axes(ad::bmm(probs, v), batch, heads, series, dk), {batch * series, F});
  const ad::Tensor attended = ad::matmul_nt(mixed, p.W_o);
  const ad::Tensor z1 =
      ad::add_bias(ad::mul_row(ad::layer_norm_rows(ad::add(attended, z), c.layer_norm_eps), p.ln1_gain), p.ln1_bias);
  const ad::Tensor ffn = ad::dense(ad::relu(ad::dense(z1, p.W_1, p.b_1)), p.W_2, p.b_2);
  return ad::add_bias(ad::mul_row(ad::layer_norm_rows(ad::add(ffn, z1), c.layer_norm_eps), p.ln2_gain), p.ln2_bias);
}

ad::Tensor Dsanet::autoregressive(const WindowBatch& batch) const {
  const auto& c = config();
  std::vector<double> recent(batch.batch * c.ar_window);
  for (std::size_t b = 0; b < batch.batch; ++b)
    for (std::size_t j = 0; j < c.ar_window; ++j)
      recent[b * c.ar_window + j] = batch.at(b, 0, c.input_steps - c.ar_window + j);
  return ad::dense(ad::Tensor::constant({batch.batch, c.ar_window}, std::move(recent)), params_.ar_w, params_.ar_b);
}

ad::Tensor Dsanet::forward(const WindowBatch& batch, DsanetTrace* trace) const {
  check_batch(batch);
  const auto& c = config();
  const std::size_t B = batch.batch, C = batch.channels, T = c.input_steps, F = c.dsanet_filters;
  const auto& P = params_;

  const ad::Tensor x = ad::Tensor::constant({B * C, T}, batch.inputs);
  const ad::Tensor global = ad::relu(ad::dense(x, P.global_w, P.global_b));  // [B*C, F]
  const ad::Tensor local_maps = ad::relu(ad::conv1d(ad::reshape(x, {B * C, 1, T}), P.local_w, P.local_b));
  const ad::Tensor local = ad::reshape(ad::mean_cols(local_maps), {B * C, F});

  const ad::Tensor zg = block(global, P.global_block, B, C, trace ? &trace->global_attention : nullptr);
  const ad::Tensor zl = block(local, P.local_block, B, C, trace ? &trace->local_attention : nullptr);
  const ad::Tensor joined = ad::reshape(ad::concat_cols({zg, zl}), {B, C * 2 * F});
  return ad::add(ad::dense(joined, P.head_w, P.head_b), autoregressive(batch));
}

}  // namespace trendfx::models
