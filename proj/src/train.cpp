#include "trendfx/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace trendfx::models {

TrainResult train(NeuralForecaster& model, std::span<const data::Window> windows, const TrainConfig& config) {
  if (windows.empty()) throw InvalidArgument("train: no windows");
  if (config.batch_size == 0) throw InvalidArgument("train: batch_size must be positive");

  auto params = model.parameters();
  auto state = optim::make_adam_state(params, optim::AdamConfig{.lr = config.lr});
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(windows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const auto batch = WindowBatch::gather(windows, std::span(order).subspan(start, end - start));
      optim::zero_grad(params);
      const ad::Tensor loss = ad::mse_loss(model.forward(batch), batch.target_tensor());
      const double value = loss.item();
      if (!std::isfinite(value)) {
        throw TrainingDivergedError(model.family() + ": loss became " + std::to_string(value) + " at epoch " +
                                    std::to_string(epoch + 1));
      }
      ad::backward(loss);
      if (config.clip_norm > 0) optim::clip_grad_norm(params, config.clip_norm);
      optim::adam_step(params, state);
      total += value * static_cast<double>(end - start);
      ++result.steps;
    }
    result.loss_curve.push_back(total / static_cast<double>(order.size()));
  }
  return result;
}

double mean_loss(const NeuralForecaster& model, std::span<const data::Window> windows, std::size_t batch_size) {
  if (windows.empty()) throw InvalidArgument("mean_loss: no windows");
  double total = 0.0;
  for (std::size_t start = 0; start < windows.size(); start += batch_size) {
    const std::size_t end = std::min(windows.size(), start + batch_size);
    std::vector<std::size_t> idx(end - start);
    std::iota(idx.begin(), idx.end(), start);
    const auto batch = WindowBatch::gather(windows, idx);
    total += ad::mse_loss(model.forward(batch), batch.target_tensor()).item() * static_cast<double>(idx.size());
  }
  return total / static_cast<double>(windows.size());
}

}  // namespace trendfx::models
