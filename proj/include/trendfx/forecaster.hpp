#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "trendfx/autodiff.hpp"
#include "trendfx/data.hpp"

namespace trendfx::models {

/// Channel order inside a window: target, drivers, then one trend channel per
/// entry of `trend_sources` (the channel each trend was filtered from).
struct ChannelLayout {
  std::size_t n_drivers = 0;
  std::vector<std::size_t> trend_sources;

  std::size_t channels() const { return 1 + n_drivers + trend_sources.size(); }
  // Target channel followed by every trend channel derived from it.
  std::vector<std::size_t> target_with_trends() const;
  bool operator==(const ChannelLayout&) const = default;
};

/// Windows packed for a forward pass. inputs: batch x channels x steps.
struct WindowBatch {
  std::size_t batch = 0;
  std::size_t channels = 0;
  std::size_t input_steps = 0;
  std::size_t output_steps = 0;
  std::vector<double> inputs;
  std::vector<double> targets;  // batch x output_steps

  static WindowBatch gather(std::span<const data::Window> windows, std::span<const std::size_t> indices);
  static WindowBatch gather(std::span<const data::Window> windows);

  double at(std::size_t b, std::size_t c, std::size_t t) const {
    return inputs[(b * channels + c) * input_steps + t];
  }
  // [batch, cols.size(), input_steps] block of the selected channels.
  std::vector<double> select(std::span<const std::size_t> cols) const;
  ad::Tensor target_tensor() const;
};

class Forecaster {
 public:
  virtual ~Forecaster() = default;
  virtual std::string family() const = 0;
  /// Forecast of the next output_steps target values, in window units.
  virtual std::vector<double> predict(const data::Window& window) const = 0;
};

struct NamedTensor {
  std::string name;
  ad::Tensor tensor;
};

/// Every hyperparameter needed to rebuild a neural forecaster.
struct ModelConfig {
  std::string family = "fcn";  // darnn | dsanet | fcn
  std::size_t input_steps = 64;
  std::size_t output_steps = 5;
  ChannelLayout layout;
  std::uint64_t seed = 0;

  std::size_t encoder_hidden = 64;
  std::size_t decoder_hidden = 64;
  bool input_attention = true;

  std::size_t dsanet_filters = 32;
  std::size_t local_kernel = 3;
  std::size_t n_head = 8;
  std::size_t ffn_dim = 64;
  std::size_t ar_window = 8;
  double layer_norm_eps = 1e-5;

  std::size_t fcn_filters = 32;
  std::vector<std::size_t> fcn_kernels{7, 5, 3};

  bool operator==(const ModelConfig&) const = default;
};

class NeuralForecaster : public Forecaster {
 public:
  explicit NeuralForecaster(ModelConfig config) : config_(std::move(config)) {}

  std::string family() const override { return config_.family; }
  const ModelConfig& config() const { return config_; }

  /// [batch, output_steps] forecast; differentiable in the parameters.
  virtual ad::Tensor forward(const WindowBatch& batch) const = 0;
  virtual std::vector<NamedTensor> named_parameters() const = 0;

  std::vector<ad::Tensor> parameters() const;
  std::size_t parameter_count() const;
  std::vector<double> predict(const data::Window& window) const override;
  std::vector<std::vector<double>> predict_all(std::span<const data::Window> windows,
                                               std::size_t batch_size = 256) const;

 protected:
  void check_batch(const WindowBatch& batch) const;

 private:
  ModelConfig config_;
};

std::unique_ptr<NeuralForecaster> make_model(const ModelConfig& config);

}  // namespace trendfx::models
