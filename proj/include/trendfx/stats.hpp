#pragma once

#include <cstddef>
#include <span>

namespace trendfx::eval {

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);
/// P(T <= t) for Student's t with `df` degrees of freedom.
double student_t_cdf(double t, double df);

struct PairedTestResult {
  double t_statistic = 0.0;
  double p_value = 0.5;
  std::size_t n_pairs = 0;
  double mean_difference = 0.0;
  bool degenerate = false;  // zero variance of the differences

  bool operator==(const PairedTestResult&) const = default;
};

/// One-sided paired t-test on d = a - b: p = P(T_{n-1} <= t), so a small p
/// means the errors in `a` are significantly smaller.
PairedTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

}  // namespace trendfx::eval
