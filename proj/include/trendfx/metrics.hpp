#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "trendfx/error.hpp"

namespace trendfx::eval {

double rmse(std::span<const double> y, std::span<const double> y_hat);
double mae(std::span<const double> y, std::span<const double> y_hat);
/// Mean absolute percentage error as a fraction (0.5 means 50%).
double mape(std::span<const double> y, std::span<const double> y_hat);

struct MetricReport {
  double rmse = 0.0;
  double mae = 0.0;
  double mape = 0.0;
  std::size_t n_samples = 0;
  std::vector<double> abs_errors;

  bool operator==(const MetricReport&) const = default;
};

MetricReport evaluate(std::span<const double> y, std::span<const double> y_hat);

}  // namespace trendfx::eval
