#pragma once

// Dual self-attention network. Every input series is encoded independently by
// a global convolution (one full-window filter per feature) and a local
// convolution (short filters, mean-pooled over time). Each branch then runs
// multi-head scaled dot-product self-attention across the series, followed by
// residual + layer normalization and a position-wise feed-forward layer. The
// prediction is a dense head over both branches plus a parallel linear
// autoregressive model on the recent target values.

#include <vector>

#include "trendfx/forecaster.hpp"

namespace trendfx::models {

struct AttentionBlockParams {
  ad::Tensor W_q, W_k, W_v, W_o;  // [F, F]
  ad::Tensor ln1_gain, ln1_bias;  // [F]
  ad::Tensor W_1, b_1;            // [ffn, F], [ffn]
  ad::Tensor W_2, b_2;            // [F, ffn], [F]
  ad::Tensor ln2_gain, ln2_bias;  // [F]
};

struct DsanetParams {
  ad::Tensor global_w, global_b;  // [F, T], [F]
  ad::Tensor local_w, local_b;    // [F, 1, l], [F]
  AttentionBlockParams global_block;
  AttentionBlockParams local_block;
  ad::Tensor head_w, head_b;  // [T_o, C * 2F], [T_o]
  ad::Tensor ar_w, ar_b;      // [T_o, ar_window], [T_o]

  static DsanetParams init(const ModelConfig& config);
  std::vector<NamedTensor> named() const;
};

struct DsanetTrace {
  // Self-attention probabilities, [batch*heads, C, C] per branch.
  std::vector<double> global_attention;
  std::vector<double> local_attention;
};

class Dsanet final : public NeuralForecaster {
 public:
  explicit Dsanet(ModelConfig config);

  ad::Tensor forward(const WindowBatch& batch) const override { return forward(batch, nullptr); }
  ad::Tensor forward(const WindowBatch& batch, DsanetTrace* trace) const;
  // Output of the linear autoregressive branch alone.
  ad::Tensor autoregressive(const WindowBatch& batch) const;
  std::vector<NamedTensor> named_parameters() const override { return params_.named(); }

  const DsanetParams& params() const { return params_; }
  DsanetParams& params() { return params_; }

 private:
  ad::Tensor block(const ad::Tensor& z, const AttentionBlockParams& p, std::size_t batch, std::size_t series,
                   std::vector<double>* attention) const;

  DsanetParams params_;
};

}  // namespace trendfx::models
