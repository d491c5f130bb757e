#include "trendfx/fcn.hpp"

namespace trendfx::models {

std::vector<std::size_t> fcn_lengths(std::size_t input_steps, const std::vector<std::size_t>& kernels) {
  std::vector<std::size_t> out;
  std::size_t len = input_steps;
  std::size_t need = 1;
  for (auto k : kernels) need += k - 1;
  if (kernels.empty() || input_steps < need) {
    throw InvalidArgument("fcn: input_steps " + std::to_string(input_steps) + " shorter than the kernel chain (" +
                          std::to_string(need) + ")");
  }
  for (auto k : kernels) {
    len = len - k + 1;
    out.push_back(len);
  }
  return out;
}

FcnParams FcnParams::init(const ModelConfig& c) {
  const auto lengths = fcn_lengths(c.input_steps, c.fcn_kernels);
  FcnParams p;
  std::size_t in = c.layout.target_with_trends().size();
  for (std::size_t i = 0; i < c.fcn_kernels.size(); ++i) {
    const std::size_t k = c.fcn_kernels[i];
    const std::string name = "conv" + std::to_string(i + 1);
    p.conv_w.push_back(ad::uniform_parameter({c.fcn_filters, in, k}, in * k, c.seed, name + ".W"));
    p.conv_b.push_back(ad::uniform_parameter({c.fcn_filters}, in * k, c.seed, name + ".b"));
    in = c.fcn_filters;
  }
  const std::size_t flat = c.fcn_filters * lengths.back();
  p.head_w = ad::uniform_parameter({c.output_steps, flat}, flat, c.seed, "head.W");
  p.head_b = ad::uniform_parameter({c.output_steps}, flat, c.seed, "head.b");
  return p;
}

std::vector<NamedTensor> FcnParams::named() const {
  std::vector<NamedTensor> out;
  for (std::size_t i = 0; i < conv_w.size(); ++i) {
    const std::string name = "conv" + std::to_string(i + 1);
    out.push_back({name + ".W", conv_w[i]});
    out.push_back({name + ".b", conv_b[i]});
  }
  out.push_back({"head.W", head_w});
  out.push_back({"head.b", head_b});
  return out;
}

Fcn::Fcn(ModelConfig config) : NeuralForecaster(std::move(config)), params_(FcnParams::init(this->config())) {}

ad::Tensor Fcn::forward(const WindowBatch& batch) const {
  check_batch(batch);
  const auto cols = input_channels();
  ad::Tensor h = ad::Tensor::constant({batch.batch, cols.size(), batch.input_steps}, batch.select(cols));
  for (std::size_t i = 0; i < params_.conv_w.size(); ++i) {
    h = ad::relu(ad::conv1d(h, params_.conv_w[i], params_.conv_b[i]));
  }
  const ad::Tensor flat = ad::reshape(h, {batch.batch, h.dim(1) * h.dim(2)});
  return ad::dense(flat, params_.head_w, params_.head_b);
}

}  // namespace trendfx::models
