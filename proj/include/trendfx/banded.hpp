#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace trendfx {

/// LDL^T factorization of a symmetric positive definite pentadiagonal matrix.
///
/// The matrix is given by its main diagonal `diag` (size n), first
/// superdiagonal `off1` (size n-1) and second superdiagonal `off2` (size n-2).
/// Factorization and solves are O(n).
class PentadiagonalLdl {
 public:
  PentadiagonalLdl() = default;
  PentadiagonalLdl(std::span<const double> diag, std::span<const double> off1, std::span<const double> off2);

  std::size_t size() const { return d_.size(); }
  // False when a non-positive pivot was met; solve() is then unusable.
  bool ok() const { return ok_; }

  void solve_in_place(std::span<double> rhs) const;
  std::vector<double> solve(std::span<const double> rhs) const;

 private:
  std::vector<double> d_;
  std::vector<double> l1_;
  std::vector<double> l2_;
  bool ok_ = true;
};

}  // namespace trendfx
