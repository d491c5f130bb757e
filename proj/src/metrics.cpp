#include "trendfx/metrics.hpp"

#include <cmath>
#include <string>

namespace trendfx::eval {
namespace {

void check(std::span<const double> y, std::span<const double> y_hat, const char* what) {
  if (y.size() != y_hat.size()) {
    throw InvalidArgument(std::string(what) + ": length mismatch (" + std::to_string(y.size()) + " vs " +
                          std::to_string(y_hat.size()) + ")");
  }
  if (y.empty()) throw InvalidArgument(std::string(what) + ": empty input");
}

}  // namespace

double rmse(std::span<const double> y, std::span<const double> y_hat) {
  check(y, y_hat, "rmse");
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - y_hat[i]) * (y[i] - y_hat[i]);
  return std::sqrt(s / static_cast<double>(y.size()));
}

double mae(std::span<const double> y, std::span<const double> y_hat) {
  check(y, y_hat, "mae");
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += std::abs(y[i] - y_hat[i]);
  return s / static_cast<double>(y.size());
}

double mape(std::span<const double> y, std::span<const double> y_hat) {
  check(y, y_hat, "mape");
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 0.0) throw InvalidArgument("mape: true value is zero at index " + std::to_string(i));
    s += std::abs((y[i] - y_hat[i]) / y[i]);
  }
  return s / static_cast<double>(y.size());
}

MetricReport evaluate(std::span<const double> y, std::span<const double> y_hat) {
  MetricReport r;
  r.rmse = rmse(y, y_hat);
  r.mae = mae(y, y_hat);
  r.mape = mape(y, y_hat);
  r.n_samples = y.size();
  r.abs_errors.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) r.abs_errors.push_back(std::abs(y[i] - y_hat[i]));
  return r;
}

}  // namespace trendfx::eval
