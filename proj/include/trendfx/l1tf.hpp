#pragma once

// L1 trend filtering: minimize (1/2)||y - x||_2^2 + lambda * ||D x||_1 where
// D is the (n-2) x n second-difference operator with rows (1, -2, 1). The
// minimizer is piecewise linear; its kinks ("knots") are where D x != 0.

#include <cstddef>
#include <span>
#include <vector>

#include "trendfx/data.hpp"

namespace trendfx::l1tf {

class SecondDifference {
 public:
  explicit SecondDifference(std::size_t n_obs);

  std::size_t n_obs() const { return n_; }
  std::size_t rows() const { return n_ >= 2 ? n_ - 2 : 0; }

  // (D v)_i = v_i - 2 v_{i+1} + v_{i+2}
  std::vector<double> apply(std::span<const double> v) const;
  std::vector<double> apply_transpose(std::span<const double> u) const;

  // D D^T in band form: diagonal 6, first off-diagonal -4, second 1.
  void gram_bands(std::vector<double>& diag, std::vector<double>& off1, std::vector<double>& off2) const;

 private:
  std::size_t n_;
};

struct SolverOptions {
  double tolerance = 1e-8;
  std::size_t max_iterations = 200;
  bool operator==(const SolverOptions&) const = default;
};

struct Problem {
  std::vector<double> y;
  double lambda = 0.0;
  SolverOptions options;
};

struct Solution {
  std::vector<double> x;
  std::vector<double> residual;  // y - x
  std::vector<double> dual;      // z with x = y - D^T z, |z| <= lambda
  double objective_value = 0.0;
  double kkt_residual = 0.0;
  double duality_gap = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

double objective(std::span<const double> y, double lambda, std::span<const double> x);
inline double objective(const Problem& p, std::span<const double> x) { return objective(p.y, p.lambda, x); }

/// Largest violation of the optimality conditions for the pair (x, z):
/// stationarity x - y + D^T z = 0, dual feasibility |z_i| <= lambda, and the
/// per-coordinate complementarity lambda |(Dx)_i| - z_i (Dx)_i (zero exactly
/// when z_i = lambda sign((Dx)_i) wherever (Dx)_i != 0). The complementarity
/// terms sum to the duality gap.
double kkt_residual(std::span<const double> y, double lambda, std::span<const double> x,
                    std::span<const double> z);

/// Primal-dual interior-point method on the box-constrained dual with
/// pentadiagonal Newton systems, finished by an exact solve on the detected
/// active set.
Solution solve(const Problem& problem);
Solution solve(std::span<const double> y, double lambda, const SolverOptions& options = {});

/// ||(D D^T)^{-1} D y||_inf: for every lambda >= lambda_max the solution is
/// the least-squares affine fit of y.
double lambda_max(std::span<const double> y);

/// Least-squares affine fit a + b t of y (t = 0..n-1).
std::vector<double> affine_fit(std::span<const double> y);

enum class AugmentMode { TargetOnly, AllChannels };

struct AugmentStats {
  std::size_t solves = 0;
  std::size_t nonconverged = 0;
};

/// Source channels filtered in a given mode for windows with `channels` channels.
std::vector<std::size_t> trend_sources(std::size_t channels, AugmentMode mode);

/// Appends one trend channel per source channel to every window. Each trend is
/// computed from that window's input block alone.
std::vector<data::Window> augment_with_trend(std::span<const data::Window> windows, double lambda,
                                             AugmentMode mode, const SolverOptions& options = {},
                                             AugmentStats* stats = nullptr);

namespace serial {
std::vector<data::Window> augment_with_trend(std::span<const data::Window> windows, double lambda,
                                             AugmentMode mode, const SolverOptions& options = {},
                                             AugmentStats* stats = nullptr);
}  // namespace serial

/// Whole-series variant: filters each source channel of `series` once and
/// slices the trend into the windows. Leaks future values into the inputs;
/// kept for replicating offline-filtered setups.
std::vector<data::Window> augment_with_series_trend(std::span<const data::Window> windows,
                                                    const data::MultivariateSeries& series, double lambda,
                                                    AugmentMode mode, const SolverOptions& options = {},
                                                    AugmentStats* stats = nullptr);

}  // namespace trendfx::l1tf
