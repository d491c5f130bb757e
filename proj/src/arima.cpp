#include "trendfx/arima.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace trendfx::models {
namespace {

struct Regression {
  Eigen::VectorXd coef;
  double sse = 0.0;
  std::size_t rows = 0;
};

// Least squares of y_t (t = start..n-1) on [1, y lags 1..p, e lags 1..q].
Regression regress(std::span<const double> y, std::span<const double> e, std::size_t p, std::size_t q,
                   std::size_t start) {
  const std::size_t n = y.size();
  const std::size_t rows = n - start;
  const std::size_t cols = 1 + p + q;
  Eigen::MatrixXd X(rows, cols);
  Eigen::VectorXd target(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t t = start + r;
    X(r, 0) = 1.0;
    for (std::size_t i = 1; i <= p; ++i) X(r, i) = y[t - i];
    for (std::size_t j = 1; j <= q; ++j) X(r, p + j) = e[t - j];
    target(r) = y[t];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < static_cast<Eigen::Index>(cols)) {
    throw SingularDesignError("arima: design matrix is rank deficient (rank " + std::to_string(qr.rank()) +
                              " of " + std::to_string(cols) + ")");
  }
  Regression out;
  out.coef = qr.solve(target);
  out.sse = (X * out.coef - target).squaredNorm();
  out.rows = rows;
  return out;
}

std::vector<double> ar_residuals(std::span<const double> y, double c, const Eigen::VectorXd& phi) {
  const std::size_t m = static_cast<std::size_t>(phi.size());
  std::vector<double> e(y.size(), 0.0);
  for (std::size_t t = m; t < y.size(); ++t) {
    double pred = c;
    for (std::size_t i = 1; i <= m; ++i) pred += phi(static_cast<Eigen::Index>(i - 1)) * y[t - i];
    e[t] = y[t] - pred;
  }
  return e;
}

}  // namespace

ArimaModel arima_fit(std::span<const double> y, std::size_t p, std::size_t q, const ArimaOptions& options) {
  const std::size_t need = 10 * (p + q + 1);
  if (y.size() < need) {
    throw InvalidArgument("arima: series of length " + std::to_string(y.size()) + " is shorter than " +
                          std::to_string(need));
  }
  ArimaModel model;
  model.p = p;
  model.q = q;
  model.phi.assign(p, 0.0);
  model.theta.assign(q, 0.0);

  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  if (*hi - *lo <= 1e-12 * std::max(1.0, std::abs(*lo))) {
    model.intercept = y.front();
    return model;
  }

  if (q == 0) {
    const auto fit = regress(y, {}, p, 0, p);
    model.intercept = fit.coef(0);
    for (std::size_t i = 0; i < p; ++i) model.phi[i] = fit.coef(static_cast<Eigen::Index>(1 + i));
    model.residual_variance = fit.sse / static_cast<double>(fit.rows);
    return model;
  }

  // Long autoregression for first-pass innovations, then alternate between
  // regressing on lagged innovations and recomputing them from the fit.
  const std::size_t long_order = std::min<std::size_t>(std::max<std::size_t>(2 * (p + q), 10), y.size() / 10);
  const auto long_fit = regress(y, {}, long_order, 0, long_order);
  std::vector<double> e = ar_residuals(y, long_fit.coef(0), long_fit.coef.tail(static_cast<Eigen::Index>(long_order)));
  const std::size_t start = long_order + q;

  Regression fit;
  for (std::size_t it = 0; it < options.max_ma_iterations; ++it) {
    fit = regress(y, e, p, q, std::max(start, p));
    ArimaModel next = model;
    next.intercept = fit.coef(0);
    for (std::size_t i = 0; i < p; ++i) next.phi[i] = fit.coef(static_cast<Eigen::Index>(1 + i));
    // The regression coefficient on e_{t-j} is -theta_j.
    for (std::size_t j = 0; j < q; ++j) next.theta[j] = -fit.coef(static_cast<Eigen::Index>(1 + p + j));
    double change = std::abs(next.intercept - model.intercept);
    for (std::size_t i = 0; i < p; ++i) change = std::max(change, std::abs(next.phi[i] - model.phi[i]));
    for (std::size_t j = 0; j < q; ++j) change = std::max(change, std::abs(next.theta[j] - model.theta[j]));
    model = next;
    model.ma_iterations = it + 1;
    e = arima_residuals(model, y);
    if (change <= options.ma_tolerance) break;
  }
  double sse = 0.0;
  const std::size_t from = std::max(start, p);
  for (std::size_t t = from; t < y.size(); ++t) sse += e[t] * e[t];
  model.residual_variance = sse / static_cast<double>(y.size() - from);
  return model;
}

std::vector<double> arima_residuals(const ArimaModel& model, std::span<const double> history) {
  std::vector<double> e(history.size(), 0.0);
  for (std::size_t t = model.p; t < history.size(); ++t) {
    double pred = model.intercept;
    for (std::size_t i = 1; i <= model.p; ++i) pred += model.phi[i - 1] * history[t - i];
    for (std::size_t j = 1; j <= model.q && j <= t; ++j) pred -= model.theta[j - 1] * e[t - j];
    e[t] = history[t] - pred;
  }
  return e;
}

std::vector<double> arima_forecast(const ArimaModel& model, std::span<const double> history, std::size_t horizon) {
  if (history.size() < model.p || (model.p > 0 && history.empty())) {
    throw InvalidArgument("arima: forecast needs at least " + std::to_string(model.p) + " history values");
  }
  std::vector<double> y(history.begin(), history.end());
  std::vector<double> e = model.q > 0 ? arima_residuals(model, history) : std::vector<double>(y.size(), 0.0);
  std::vector<double> out;
  out.reserve(horizon);
  for (std::size_t h = 0; h < horizon; ++h) {
    const std::size_t t = y.size();
    double pred = model.intercept;
    for (std::size_t i = 1; i <= model.p; ++i) pred += model.phi[i - 1] * y[t - i];
    for (std::size_t j = 1; j <= model.q && j <= t; ++j) pred -= model.theta[j - 1] * e[t - j];
    y.push_back(pred);
    e.push_back(0.0);
    out.push_back(pred);
  }
  return out;
}

std::vector<double> ArimaForecaster::predict(const data::Window& window) const {
  return arima_forecast(model_, window.channel(0), horizon_);
}

}  // namespace trendfx::models
