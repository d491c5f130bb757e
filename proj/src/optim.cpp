#include "trendfx/optim.hpp"

#include <cmath>

namespace trendfx::optim {

AdamState make_adam_state(std::span<const ad::Tensor> params, const AdamConfig& config) {
  AdamState s;
  s.config = config;
  for (const auto& p : params) s.moments.push_back({std::vector<double>(p.numel(), 0.0), std::vector<double>(p.numel(), 0.0)});
  return s;
}

void adam_update(std::span<double> param, std::span<const double> grad, AdamMoments& mo, std::size_t step,
                 const AdamConfig& c) {
  if (grad.size() != param.size() || mo.m.size() != param.size() || mo.v.size() != param.size()) {
    throw ShapeError("adam: parameter, gradient and moment sizes differ");
  }
  const double t = static_cast<double>(step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < param.size(); ++i) {
    mo.m[i] = c.beta1 * mo.m[i] + (1.0 - c.beta1) * grad[i];
    mo.v[i] = c.beta2 * mo.v[i] + (1.0 - c.beta2) * grad[i] * grad[i];
    const double mhat = mo.m[i] / bc1;
    const double vhat = mo.v[i] / bc2;
    param[i] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
  }
}

void adam_step(std::span<ad::Tensor> params, AdamState& state) {
  if (params.size() != state.moments.size()) throw ShapeError("adam: parameter count changed");
  ++state.step;
  for (std::size_t i = 0; i < params.size(); ++i) {
    adam_update(params[i].mutable_values(), params[i].grad(), state.moments[i], state.step, state.config);
  }
}

double clip_grad_norm(std::span<ad::Tensor> params, double max_norm) {
  double sq = 0.0;
  for (const auto& p : params)
    for (double g : p.grad()) sq += g * g;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double k = max_norm / norm;
    for (auto& p : params)
      for (double& g : p.mutable_grad()) g *= k;
  }
  return norm;
}

void zero_grad(std::span<ad::Tensor> params) {
  for (auto& p : params) p.zero_grad();
}

}  // namespace trendfx::optim
