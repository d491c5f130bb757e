#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "trendfx/forecaster.hpp"
#include "trendfx/optim.hpp"

namespace trendfx::models {

class TrainingDivergedError : public Error {
 public:
  using Error::Error;
};

struct TrainConfig {
  std::size_t epochs = 20;
  std::size_t batch_size = 64;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  double clip_norm = 0.0;  // 0 disables clipping

  bool operator==(const TrainConfig&) const = default;
};

struct TrainResult {
  std::vector<double> loss_curve;  // mean minibatch loss per epoch
  std::size_t steps = 0;
};

/// Minibatch Adam on the mean squared error over every output step.
TrainResult train(NeuralForecaster& model, std::span<const data::Window> windows, const TrainConfig& config);

/// Mean squared error of the model over `windows` (no gradients kept).
double mean_loss(const NeuralForecaster& model, std::span<const data::Window> windows,
                 std::size_t batch_size = 256);

}  // namespace trendfx::models
