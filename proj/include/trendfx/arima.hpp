#pragma once

// ARIMA(p, 0, q):
//   y_t = theta_0 + sum_i phi_i y_{t-i} + e_t - sum_j theta_j e_{t-j}
// fitted by conditional least squares.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "trendfx/forecaster.hpp"

namespace trendfx::models {

class SingularDesignError : public Error {
 public:
  using Error::Error;
};

struct ArimaModel {
  std::size_t p = 1;
  std::size_t q = 0;
  double intercept = 0.0;        // theta_0
  std::vector<double> phi;       // phi_1..phi_p
  std::vector<double> theta;     // theta_1..theta_q
  double residual_variance = 0.0;
  std::size_t ma_iterations = 0;

  bool operator==(const ArimaModel&) const = default;
};

struct ArimaOptions {
  std::size_t max_ma_iterations = 50;
  double ma_tolerance = 1e-10;
};

ArimaModel arima_fit(std::span<const double> y, std::size_t p, std::size_t q, const ArimaOptions& options = {});

/// One-step residuals of `history` under the model, with pre-sample errors 0.
std::vector<double> arima_residuals(const ArimaModel& model, std::span<const double> history);

/// Iterated one-step forecasts after the end of `history`; future errors are 0.
std::vector<double> arima_forecast(const ArimaModel& model, std::span<const double> history, std::size_t horizon);

/// Forecaster adapter: reads the target channel of a window in the units the
/// model was fitted in.
class ArimaForecaster final : public Forecaster {
 public:
  ArimaForecaster(ArimaModel model, std::size_t horizon) : model_(std::move(model)), horizon_(horizon) {}
  std::string family() const override { return "arima"; }
  std::vector<double> predict(const data::Window& window) const override;
  const ArimaModel& model() const { return model_; }

 private:
  ArimaModel model_;
  std::size_t horizon_;
};

}  // namespace trendfx::models
