#include "trendfx/forecaster.hpp"

#include <algorithm>
#include <numeric>

#include "trendfx/darnn.hpp"
#include "trendfx/dsanet.hpp"
#include "trendfx/fcn.hpp"

namespace trendfx::models {

std::vector<std::size_t> ChannelLayout::target_with_trends() const {
  std::vector<std::size_t> out{0};
  for (std::size_t i = 0; i < trend_sources.size(); ++i) {
    if (trend_sources[i] == 0) out.push_back(1 + n_drivers + i);
  }
  return out;
}

WindowBatch WindowBatch::gather(std::span<const data::Window> windows, std::span<const std::size_t> indices) {
  if (indices.empty()) throw InvalidArgument("empty batch");
  WindowBatch b;
  const auto& first = windows[indices.front()];
  b.batch = indices.size();
  b.channels = first.channels;
  b.input_steps = first.input_steps;
  b.output_steps = first.output_steps();
  b.inputs.reserve(b.batch * b.channels * b.input_steps);
  b.targets.reserve(b.batch * b.output_steps);
  for (auto i : indices) {
    const auto& w = windows[i];
    if (w.channels != b.channels || w.input_steps != b.input_steps || w.output_steps() != b.output_steps) {
      throw ShapeError("windows in a batch must share one shape");
    }
    b.inputs.insert(b.inputs.end(), w.inputs.begin(), w.inputs.end());
    b.targets.insert(b.targets.end(), w.targets.begin(), w.targets.end());
  }
  return b;
}

WindowBatch WindowBatch::gather(std::span<const data::Window> windows) {
  std::vector<std::size_t> idx(windows.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return gather(windows, idx);
}

std::vector<double> WindowBatch::select(std::span<const std::size_t> cols) const {
  std::vector<double> out;
  out.reserve(batch * cols.size() * input_steps);
  for (std::size_t b = 0; b < batch; ++b) {
    for (auto c : cols) {
      if (c >= channels) throw ShapeError("channel " + std::to_string(c) + " not present in batch");
      const double* src = inputs.data() + (b * channels + c) * input_steps;
      out.insert(out.end(), src, src + input_steps);
    }
  }
  return out;
}

ad::Tensor WindowBatch::target_tensor() const { return ad::Tensor::constant({batch, output_steps}, targets); }

std::vector<ad::Tensor> NeuralForecaster::parameters() const {
  std::vector<ad::Tensor> out;
  for (auto& nt : named_parameters()) out.push_back(nt.tensor);
  return out;
}

std::size_t NeuralForecaster::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : parameters()) n += t.numel();
  return n;
}

void NeuralForecaster::check_batch(const WindowBatch& batch) const {
  if (batch.channels != config_.layout.channels() || batch.input_steps != config_.input_steps) {
    throw ShapeError(family() + ": batch has " + std::to_string(batch.channels) + " channels x " +
                     std::to_string(batch.input_steps) + " steps, model expects " +
                     std::to_string(config_.layout.channels()) + " x " + std::to_string(config_.input_steps));
  }
}

std::vector<double> NeuralForecaster::predict(const data::Window& window) const {
  const std::size_t idx = 0;
  const auto out = forward(WindowBatch::gather(std::span(&window, 1), std::span(&idx, 1)));
  return {out.values().begin(), out.values().end()};
}

std::vector<std::vector<double>> NeuralForecaster::predict_all(std::span<const data::Window> windows,
                                                               std::size_t batch_size) const {
  std::vector<std::vector<double>> out;
  out.reserve(windows.size());
  const std::size_t to = config_.output_steps;
  for (std::size_t start = 0; start < windows.size(); start += batch_size) {
    const std::size_t end = std::min(windows.size(), start + batch_size);
    std::vector<std::size_t> idx(end - start);
    std::iota(idx.begin(), idx.end(), start);
    const auto y = forward(WindowBatch::gather(windows, idx));
    for (std::size_t b = 0; b < idx.size(); ++b) {
      out.emplace_back(y.values().begin() + static_cast<std::ptrdiff_t>(b * to),
                       y.values().begin() + static_cast<std::ptrdiff_t>((b + 1) * to));
    }
  }
  return out;
}

std::unique_ptr<NeuralForecaster> make_model(const ModelConfig& config) {
  if (config.input_steps == 0 || config.output_steps == 0) throw InvalidArgument("model: window sizes must be positive");
  if (config.family == "darnn") return std::make_unique<Darnn>(config);
  if (config.family == "dsanet") return std::make_unique<Dsanet>(config);
  if (config.family == "fcn") return std::make_unique<Fcn>(config);
  throw InvalidArgument("unknown model family '" + config.family + "'");
}

}  // namespace trendfx::models
