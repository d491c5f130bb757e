#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "trendfx/autodiff.hpp"

namespace trendfx::optim {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamMoments {
  std::vector<double> m;
  std::vector<double> v;
};

struct AdamState {
  AdamConfig config;
  std::vector<AdamMoments> moments;  // one per parameter
  std::size_t step = 0;
};

AdamState make_adam_state(std::span<const ad::Tensor> params, const AdamConfig& config = {});

/// One bias-corrected Adam update of every parameter from its accumulated
/// gradient. Increments state.step by one.
void adam_step(std::span<ad::Tensor> params, AdamState& state);

/// Same update on raw arrays; `step` is the 1-based step index.
void adam_update(std::span<double> param, std::span<const double> grad, AdamMoments& moments, std::size_t step,
                 const AdamConfig& config);

/// Rescales gradients so their global L2 norm is at most max_norm. Returns the
/// norm before clipping.
double clip_grad_norm(std::span<ad::Tensor> params, double max_norm);

void zero_grad(std::span<ad::Tensor> params);

}  // namespace trendfx::optim
