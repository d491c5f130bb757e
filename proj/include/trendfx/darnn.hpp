#pragma once

// Dual-stage attention RNN: an LSTM encoder whose inputs are re-weighted at
// every step by attention over the driving series, and an LSTM decoder that
// attends over all encoder states. The output head reads only the decoder
// hidden state; the context vector steers the decoder input but does not
// enter the prediction directly.

#include <vector>

#include "trendfx/lstm.hpp"

namespace trendfx::models {

struct DarnnParams {
  LstmParams encoder;  // hidden m, input = attended series count
  LstmParams decoder;  // hidden p, input 1
  // Input attention: e^k = v_e^T tanh(W_e [h; s] + U_e x^k).
  ad::Tensor v_e;  // [1, T]
  ad::Tensor W_e;  // [T, 2m]
  ad::Tensor U_e;  // [T, T]
  // Temporal attention: l^i = v_d^T tanh(W_d [d; s'] + U_d h_i).
  ad::Tensor v_d;  // [1, m]
  ad::Tensor W_d;  // [m, 2p]
  ad::Tensor U_d;  // [m, m]
  // Decoder input map y~ = w~^T [y_prev; c] + b~.
  ad::Tensor w_tilde;  // [1, 1 + m]
  ad::Tensor b_tilde;  // [1]
  // Output head y = v_y^T (W_y d + b_w) + b_v.
  ad::Tensor W_y;  // [p, p]
  ad::Tensor b_w;  // [p]
  ad::Tensor v_y;  // [1, p]
  ad::Tensor b_v;  // [1]

  static DarnnParams init(const ModelConfig& config);
  std::vector<NamedTensor> named() const;
};

/// Attention weights recorded during a forward pass (values only).
struct DarnnTrace {
  std::vector<std::vector<double>> input_weights;     // per encoder step, [batch x n]
  std::vector<std::vector<double>> temporal_weights;  // per decoder step, [batch x T]
};

/// alpha_t over the n attended series. `ux` holds U_e x^k for every
/// (sample, series) pair as rows b*n + k of a [batch*n, T] tensor.
ad::Tensor darnn_input_attention(const ad::Tensor& ux, const LstmState& encoder_state, const DarnnParams& p,
                                 std::size_t n_series);

/// Convenience overload for one sample: x_columns is n series of length T.
std::vector<double> darnn_input_attention(const std::vector<std::vector<double>>& x_columns,
                                          const LstmState& encoder_state, const DarnnParams& p);

struct TemporalAttention {
  ad::Tensor weights;  // beta, [batch, T]
  ad::Tensor context;  // c, [batch, m]
};

/// `encoder_states` is [batch, T, m]; `projected` is U_d h_i as [batch*T, m].
TemporalAttention darnn_temporal_attention(const ad::Tensor& encoder_states, const ad::Tensor& projected,
                                           const LstmState& decoder_state, const DarnnParams& p);

class Darnn final : public NeuralForecaster {
 public:
  explicit Darnn(ModelConfig config);
  Darnn(ModelConfig config, DarnnParams params);

  ad::Tensor forward(const WindowBatch& batch) const override { return forward(batch, nullptr); }
  ad::Tensor forward(const WindowBatch& batch, DarnnTrace* trace) const;
  std::vector<NamedTensor> named_parameters() const override { return params_.named(); }

  const DarnnParams& params() const { return params_; }
  DarnnParams& params() { return params_; }
  // Channels fed through input attention: every channel except the raw target.
  std::vector<std::size_t> attended_channels() const;

 private:
  DarnnParams params_;
};

}  // namespace trendfx::models
