#pragma once

#include <vector>

#include "trendfx/forecaster.hpp"

namespace trendfx::models {

/// Temporal fully convolutional network over the target channel and its
/// trend channels: conv -> relu for each kernel size, then a dense head.
struct FcnParams {
  std::vector<ad::Tensor> conv_w;  // [filters, in, k]
  std::vector<ad::Tensor> conv_b;  // [filters]
  ad::Tensor head_w, head_b;       // [T_o, filters * L_last], [T_o]

  static FcnParams init(const ModelConfig& config);
  std::vector<NamedTensor> named() const;
};

/// Temporal length after each valid (unpadded, stride 1) convolution.
std::vector<std::size_t> fcn_lengths(std::size_t input_steps, const std::vector<std::size_t>& kernels);

class Fcn final : public NeuralForecaster {
 public:
  explicit Fcn(ModelConfig config);

  ad::Tensor forward(const WindowBatch& batch) const override;
  std::vector<NamedTensor> named_parameters() const override { return params_.named(); }

  const FcnParams& params() const { return params_; }
  FcnParams& params() { return params_; }
  std::vector<std::size_t> input_channels() const { return config().layout.target_with_trends(); }

 private:
  FcnParams params_;
};

}  // namespace trendfx::models
