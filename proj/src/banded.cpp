#include "trendfx/banded.hpp"

#include <cmath>

#include "trendfx/error.hpp"

namespace trendfx {

PentadiagonalLdl::PentadiagonalLdl(std::span<const double> diag, std::span<const double> off1,
                                   std::span<const double> off2) {
  const std::size_t n = diag.size();
  if ((n > 0 && off1.size() + 1 < n) || (n > 1 && off2.size() + 2 < n)) {
    throw ShapeError("pentadiagonal band sizes do not match the diagonal");
  }
  d_.assign(n, 0.0);
  l1_.assign(n, 0.0);
  l2_.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double di = diag[i];
    if (i >= 1) di -= l1_[i - 1] * l1_[i - 1] * d_[i - 1];
    if (i >= 2) di -= l2_[i - 2] * l2_[i - 2] * d_[i - 2];
    if (!(di > 0.0) || !std::isfinite(di)) {
      ok_ = false;
      return;
    }
    d_[i] = di;
    if (i + 1 < n) {
      double a = off1[i];
      if (i >= 1) a -= l2_[i - 1] * l1_[i - 1] * d_[i - 1];
      l1_[i] = a / di;
    }
    if (i + 2 < n) l2_[i] = off2[i] / di;
  }
}

void PentadiagonalLdl::solve_in_place(std::span<double> b) const {
  const std::size_t n = d_.size();
  if (b.size() != n) throw ShapeError("right-hand side size mismatch");
  if (!ok_) throw Error("pentadiagonal factorization failed");
  for (std::size_t i = 1; i < n; ++i) {
    b[i] -= l1_[i - 1] * b[i - 1];
    if (i >= 2) b[i] -= l2_[i - 2] * b[i - 2];
  }
  for (std::size_t i = 0; i < n; ++i) b[i] /= d_[i];
  for (std::size_t k = n; k-- > 0;) {
    if (k + 1 < n) b[k] -= l1_[k] * b[k + 1];
    if (k + 2 < n) b[k] -= l2_[k] * b[k + 2];
  }
}

std::vector<double> PentadiagonalLdl::solve(std::span<const double> rhs) const {
  std::vector<double> x(rhs.begin(), rhs.end());
  solve_in_place(x);
  return x;
}

}  // namespace trendfx
