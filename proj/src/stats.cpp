#include "trendfx/stats.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "trendfx/error.hpp"

namespace trendfx::eval {
namespace {

// Continued fraction for I_x(a, b), modified Lentz.
double beta_fraction(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  double c = 1.0;
  double d = 1.0 - (a + b) * x / (a + 1.0);
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double num = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
    d = 1.0 + num * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + num / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    num = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
    d = 1.0 + num * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + num / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < eps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0) || !(b > 0)) throw InvalidArgument("incomplete_beta: a and b must be positive");
  if (x <= 0) return 0.0;
  if (x >= 1) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_fraction(a, b, x) / a;
  return 1.0 - front * beta_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
  if (!(df > 0)) throw InvalidArgument("student_t_cdf: df must be positive");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double x = df / (df + t * t);
  const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, x);
  return t > 0 ? 1.0 - tail : tail;
}

PairedTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw InvalidArgument("paired_t_test: length mismatch (" + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
  }
  const std::size_t n = a.size();
  if (n < 2) throw InvalidArgument("paired_t_test: need at least two pairs");
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i] - mean;
    ss += d * d;
  }
  PairedTestResult r;
  r.n_pairs = n;
  r.mean_difference = mean;
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  const double se = sd / std::sqrt(static_cast<double>(n));
  // Differences equal to rounding noise around the mean count as constant.
  if (se <= 1e-14 * std::max(1.0, std::abs(mean))) {
    r.degenerate = true;
    if (mean == 0.0) {
      r.t_statistic = 0.0;
      r.p_value = 0.5;
    } else {
      r.t_statistic = mean > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      r.p_value = mean > 0 ? 1.0 : 0.0;
    }
    return r;
  }
  r.t_statistic = mean / se;
  r.p_value = student_t_cdf(r.t_statistic, static_cast<double>(n - 1));
  return r;
}

}  // namespace trendfx::eval
