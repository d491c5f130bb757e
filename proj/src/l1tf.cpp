#include "trendfx/l1tf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "trendfx/banded.hpp"

namespace trendfx::l1tf {

SecondDifference::SecondDifference(std::size_t n_obs) : n_(n_obs) {}

std::vector<double> SecondDifference::apply(std::span<const double> v) const {
  if (v.size() != n_) throw ShapeError("second difference: vector length does not match n_obs");
  std::vector<double> out(rows());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = v[i] - 2.0 * v[i + 1] + v[i + 2];
  return out;
}

std::vector<double> SecondDifference::apply_transpose(std::span<const double> u) const {
  if (u.size() != rows()) throw ShapeError("second difference transpose: length mismatch");
  std::vector<double> out(n_, 0.0);
  for (std::size_t i = 0; i < u.size(); ++i) {
    out[i] += u[i];
    out[i + 1] -= 2.0 * u[i];
    out[i + 2] += u[i];
  }
  return out;
}

void SecondDifference::gram_bands(std::vector<double>& diag, std::vector<double>& off1,
                                  std::vector<double>& off2) const {
  const std::size_t m = rows();
  diag.assign(m, 6.0);
  off1.assign(m > 0 ? m - 1 : 0, -4.0);
  off2.assign(m > 1 ? m - 2 : 0, 1.0);
}

double objective(std::span<const double> y, double lambda, std::span<const double> x) {
  if (x.size() != y.size()) throw ShapeError("objective: x and y lengths differ");
  double fit = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) fit += (y[i] - x[i]) * (y[i] - x[i]);
  double tv = 0.0;
  for (std::size_t i = 0; i + 2 < x.size(); ++i) tv += std::abs(x[i] - 2.0 * x[i + 1] + x[i + 2]);
  return 0.5 * fit + lambda * tv;
}

double kkt_residual(std::span<const double> y, double lambda, std::span<const double> x,
                    std::span<const double> z) {
  const std::size_t n = y.size();
  if (x.size() != n) throw ShapeError("kkt_residual: x and y lengths differ");
  if (n < 3) {
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) r = std::max(r, std::abs(x[i] - y[i]));
    return r;
  }
  SecondDifference d(n);
  if (z.size() != d.rows()) throw ShapeError("kkt_residual: dual length must be n - 2");
  auto dtz = d.apply_transpose(z);
  auto dx = d.apply(x);
  double r = 0.0;
  for (std::size_t i = 0; i < n; ++i) r = std::max(r, std::abs(x[i] - y[i] + dtz[i]));
  for (std::size_t i = 0; i < z.size(); ++i) {
    r = std::max(r, std::abs(z[i]) - lambda);
    r = std::max(r, lambda * std::abs(dx[i]) - z[i] * dx[i]);
  }
  return r;
}

std::vector<double> affine_fit(std::span<const double> y) {
  const std::size_t n = y.size();
  std::vector<double> out(n);
  if (n == 0) return out;
  if (n == 1) {
    out[0] = y[0];
    return out;
  }
  // Centered regression on t.
  const double tbar = 0.5 * static_cast<double>(n - 1);
  double ybar = 0.0;
  for (double v : y) ybar += v;
  ybar /= static_cast<double>(n);
  double stt = 0.0;
  double sty = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dt = static_cast<double>(i) - tbar;
    stt += dt * dt;
    sty += dt * (y[i] - ybar);
  }
  const double slope = sty / stt;
  for (std::size_t i = 0; i < n; ++i) out[i] = ybar + slope * (static_cast<double>(i) - tbar);
  return out;
}

namespace {

Solution trivial_solution(std::span<const double> y, double lambda, bool with_dual) {
  Solution s;
  s.x.assign(y.begin(), y.end());
  s.residual.assign(y.size(), 0.0);
  if (with_dual && y.size() >= 3) s.dual.assign(y.size() - 2, 0.0);
  s.objective_value = objective(y, lambda, s.x);
  s.kkt_residual = with_dual && y.size() >= 3 ? kkt_residual(y, lambda, s.x, s.dual) : 0.0;
  s.converged = true;
  return s;
}

void finish(Solution& s, std::span<const double> y, double lambda, const SolverOptions& opt) {
  s.residual.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) s.residual[i] = y[i] - s.x[i];
  s.objective_value = objective(y, lambda, s.x);
  s.kkt_residual = kkt_residual(y, lambda, s.x, s.dual);
  s.converged = s.kkt_residual <= opt.tolerance;
}

std::vector<double> primal_from_dual(const SecondDifference& d, std::span<const double> y,
                                     std::span<const double> z) {
  auto dtz = d.apply_transpose(z);
  std::vector<double> x(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) x[i] = y[i] - dtz[i];
  return x;
}

// Solves the problem restricted to a guessed active set: z_i = lambda * sign_i
// on active coordinates, (D x)_i = 0 elsewhere. The free block of D D^T keeps
// bandwidth two after deleting the active rows and columns.
bool polish(const SecondDifference& d, std::span<const double> y, double lambda,
            std::span<const int> sign, std::vector<double>& z_out) {
  const std::size_t m = d.rows();
  std::vector<double> z(m, 0.0);
  std::vector<std::size_t> free_idx;
  for (std::size_t i = 0; i < m; ++i) {
    if (sign[i] != 0) {
      z[i] = lambda * sign[i];
    } else {
      free_idx.push_back(i);
    }
  }
  if (!free_idx.empty()) {
    auto w = primal_from_dual(d, y, z);
    auto dw = d.apply(w);
    const std::size_t k = free_idx.size();
    std::vector<double> diag(k, 6.0), off1(k > 0 ? k - 1 : 0), off2(k > 1 ? k - 2 : 0);
    auto gram = [](std::size_t gap) { return gap == 1 ? -4.0 : gap == 2 ? 1.0 : 0.0; };
    for (std::size_t j = 0; j + 1 < k; ++j) off1[j] = gram(free_idx[j + 1] - free_idx[j]);
    for (std::size_t j = 0; j + 2 < k; ++j) off2[j] = gram(free_idx[j + 2] - free_idx[j]);
    PentadiagonalLdl ldl(diag, off1, off2);
    if (!ldl.ok()) return false;
    std::vector<double> rhs(k);
    for (std::size_t j = 0; j < k; ++j) rhs[j] = dw[free_idx[j]];
    ldl.solve_in_place(rhs);
    for (std::size_t j = 0; j < k; ++j) z[free_idx[j]] = rhs[j];
  }
  z_out = std::move(z);
  return true;
}

}  // namespace

double lambda_max(std::span<const double> y) {
  if (y.size() < 3) throw InvalidArgument("lambda_max needs at least 3 observations");
  SecondDifference d(y.size());
  std::vector<double> diag, off1, off2;
  d.gram_bands(diag, off1, off2);
  PentadiagonalLdl ldl(diag, off1, off2);
  auto u = ldl.solve(d.apply(y));
  double mx = 0.0;
  for (double v : u) mx = std::max(mx, std::abs(v));
  return mx;
}

Solution solve(const Problem& problem) { return solve(problem.y, problem.lambda, problem.options); }

Solution solve(std::span<const double> y, double lambda, const SolverOptions& opt) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be finite and >= 0");
  if (!(opt.tolerance > 0.0)) throw InvalidArgument("tolerance must be positive");
  const std::size_t n = y.size();
  if (n < 3 || lambda == 0.0) return trivial_solution(y, lambda, true);

  const SecondDifference d(n);
  const std::size_t m = d.rows();
  std::vector<double> diag, off1, off2;
  d.gram_bands(diag, off1, off2);
  const PentadiagonalLdl gram(diag, off1, off2);
  const auto dy = d.apply(y);

  Solution best;
  best.dual = gram.solve(dy);
  {
    // Unconstrained dual optimum inside the box: the affine fit is optimal.
    double zmax = 0.0;
    for (double v : best.dual) zmax = std::max(zmax, std::abs(v));
    if (zmax <= lambda) {
      best.x = primal_from_dual(d, y, best.dual);
      finish(best, y, lambda, opt);
      if (best.converged) return best;
    }
  }

  constexpr double kAlpha = 0.01;
  constexpr double kBeta = 0.5;
  constexpr double kMu = 2.0;
  constexpr std::size_t kMaxLineSearch = 20;

  std::vector<double> z(m, 0.0), mu1(m, 1.0), mu2(m, 1.0);
  std::vector<double> f1(m), f2(m), w(m), dz(m), dmu1(m), dmu2(m);
  std::vector<double> nz(m), nmu1(m), nmu2(m), sdiag(m), rhs(m);
  std::vector<int> sign(m);
  double t = 1e-10;
  double step = std::numeric_limits<double>::infinity();
  double dobj = 0.0;
  double best_kkt = std::numeric_limits<double>::infinity();

  auto gram_mul = [&](std::span<const double> v) { return d.apply(d.apply_transpose(v)); };
  auto residual_norm = [&](std::span<const double> zz, std::span<const double> m1, std::span<const double> m2,
                           double inv_t) {
    auto ddtz = gram_mul(zz);
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double rd = ddtz[i] - dy[i] + m1[i] - m2[i];
      const double c1 = -m1[i] * (zz[i] - lambda) - inv_t;
      const double c2 = -m2[i] * (-zz[i] - lambda) - inv_t;
      s += rd * rd + c1 * c1 + c2 * c2;
    }
    return std::sqrt(s);
  };

  std::size_t iter = 0;
  for (; iter < opt.max_iterations; ++iter) {
    const auto dtz = d.apply_transpose(z);
    const auto ddtz = d.apply(dtz);
    for (std::size_t i = 0; i < m; ++i) w[i] = dy[i] - (mu1[i] - mu2[i]);

    auto gw = gram.solve(w);
    double wgw = 0.0, ww = 0.0, musum = 0.0, dtz2 = 0.0, dyz = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      wgw += w[i] * gw[i];
      ww += w[i] * w[i];
      musum += mu1[i] + mu2[i];
      dyz += dy[i] * z[i];
    }
    for (double v : dtz) dtz2 += v * v;
    const double pobj = std::min(0.5 * wgw + lambda * musum, 0.5 * ww + lambda * musum);
    dobj = std::max(-0.5 * dtz2 + dyz, dobj);
    const double gap = pobj - dobj;

    // Try the exact active-set solve suggested by the current iterate.
    for (std::size_t i = 0; i < m; ++i) {
      const double up = lambda - z[i];
      const double lo = lambda + z[i];
      sign[i] = up < mu1[i] ? 1 : (lo < mu2[i] ? -1 : 0);
    }
    std::vector<double> zp;
    if (polish(d, y, lambda, sign, zp)) {
      auto xp = primal_from_dual(d, y, zp);
      const double k = kkt_residual(y, lambda, xp, zp);
      if (k < best_kkt) {
        best_kkt = k;
        best.x = std::move(xp);
        best.dual = std::move(zp);
        best.duality_gap = gap;
      }
      if (k <= opt.tolerance) break;
    }
    if (gap <= 0.25 * opt.tolerance) {
      // The interior iterate itself is accurate enough.
      auto xi = primal_from_dual(d, y, z);
      const double k = kkt_residual(y, lambda, xi, z);
      if (k < best_kkt) {
        best_kkt = k;
        best.x = std::move(xi);
        best.dual = z;
        best.duality_gap = gap;
      }
      if (k <= opt.tolerance) break;
    }

    if (step >= 0.2) t = std::max(2.0 * static_cast<double>(m) * kMu / gap, 1.2 * t);
    const double inv_t = 1.0 / t;

    for (std::size_t i = 0; i < m; ++i) {
      f1[i] = z[i] - lambda;
      f2[i] = -z[i] - lambda;
      sdiag[i] = diag[i] - (mu1[i] / f1[i] + mu2[i] / f2[i]);
      rhs[i] = -ddtz[i] + dy[i] + inv_t / f1[i] - inv_t / f2[i];
    }
    const PentadiagonalLdl newton(sdiag, off1, off2);
    if (!newton.ok()) break;
    dz = rhs;
    newton.solve_in_place(dz);
    for (std::size_t i = 0; i < m; ++i) {
      dmu1[i] = -(mu1[i] + (inv_t + dz[i] * mu1[i]) / f1[i]);
      dmu2[i] = -(mu2[i] + (inv_t - dz[i] * mu2[i]) / f2[i]);
    }

    const double res0 = residual_norm(z, mu1, mu2, inv_t);
    step = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (dmu1[i] < 0.0) step = std::min(step, -mu1[i] / dmu1[i]);
      if (dmu2[i] < 0.0) step = std::min(step, -mu2[i] / dmu2[i]);
      // Keep z strictly inside the box.
      if (dz[i] > 0.0) step = std::min(step, -f1[i] / dz[i]);
      if (dz[i] < 0.0) step = std::min(step, f2[i] / dz[i]);
    }
    step *= 0.99;
    bool accepted = false;
    for (std::size_t ls = 0; ls < kMaxLineSearch; ++ls) {
      bool inside = true;
      for (std::size_t i = 0; i < m; ++i) {
        nz[i] = z[i] + step * dz[i];
        nmu1[i] = mu1[i] + step * dmu1[i];
        nmu2[i] = mu2[i] + step * dmu2[i];
        if (nz[i] - lambda >= 0.0 || -nz[i] - lambda >= 0.0) inside = false;
      }
      if (inside && residual_norm(nz, nmu1, nmu2, inv_t) <= (1.0 - kAlpha * step) * res0) {
        accepted = true;
        break;
      }
      step *= kBeta;
    }
    if (!accepted) {
      // Take the shortened step anyway; the next centering update recovers.
      bool inside = true;
      for (std::size_t i = 0; i < m; ++i) {
        if (std::abs(nz[i]) >= lambda) inside = false;
      }
      if (!inside) break;
    }
    z.swap(nz);
    mu1.swap(nmu1);
    mu2.swap(nmu2);
  }

  best.iterations = iter;
  if (best.x.empty()) {
    best.x = primal_from_dual(d, y, z);
    best.dual = z;
  }
  finish(best, y, lambda, opt);
  return best;
}

std::vector<std::size_t> trend_sources(std::size_t channels, AugmentMode mode) {
  std::vector<std::size_t> out;
  if (channels == 0) return out;
  if (mode == AugmentMode::TargetOnly) {
    out.push_back(0);
  } else {
    out.resize(channels);
    std::iota(out.begin(), out.end(), std::size_t{0});
  }
  return out;
}

namespace {

data::Window with_trends(const data::Window& w, std::span<const std::size_t> sources, double lambda,
                         const SolverOptions& options, std::size_t& nonconverged) {
  data::Window out = w;
  out.channels = w.channels + sources.size();
  out.inputs.resize(out.channels * w.input_steps);
  for (std::size_t s = 0; s < sources.size(); ++s) {
    auto sol = solve(w.channel(sources[s]), lambda, options);
    if (!sol.converged) ++nonconverged;
    std::copy(sol.x.begin(), sol.x.end(), out.channel(w.channels + s).begin());
  }
  return out;
}

void check_windows(std::span<const data::Window> windows, double lambda) {
  if (windows.empty()) throw InvalidArgument("augment_with_trend: no windows");
  if (!(lambda >= 0.0)) throw InvalidArgument("augment_with_trend: lambda must be >= 0");
  for (const auto& w : windows) {
    if (w.channels != windows.front().channels || w.input_steps != windows.front().input_steps) {
      throw ShapeError("augment_with_trend: windows differ in shape");
    }
  }
}

}  // namespace

namespace serial {

std::vector<data::Window> augment_with_trend(std::span<const data::Window> windows, double lambda,
                                             AugmentMode mode, const SolverOptions& options,
                                             AugmentStats* stats) {
  check_windows(windows, lambda);
  const auto sources = trend_sources(windows.front().channels, mode);
  std::vector<data::Window> out;
  out.reserve(windows.size());
  std::size_t bad = 0;
  for (const auto& w : windows) out.push_back(with_trends(w, sources, lambda, options, bad));
  if (stats) {
    stats->solves += windows.size() * sources.size();
    stats->nonconverged += bad;
  }
  return out;
}

}  // namespace serial

std::vector<data::Window> augment_with_trend(std::span<const data::Window> windows, double lambda,
                                             AugmentMode mode, const SolverOptions& options,
                                             AugmentStats* stats) {
  check_windows(windows, lambda);
  const auto sources = trend_sources(windows.front().channels, mode);
  std::vector<data::Window> out(windows.size());
  std::size_t bad = 0;
  const auto count = static_cast<std::ptrdiff_t>(windows.size());
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : bad)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    std::size_t local = 0;
    out[static_cast<std::size_t>(i)] = with_trends(windows[static_cast<std::size_t>(i)], sources, lambda, options, local);
    bad += local;
  }
  if (stats) {
    stats->solves += windows.size() * sources.size();
    stats->nonconverged += bad;
  }
  return out;
}

std::vector<data::Window> augment_with_series_trend(std::span<const data::Window> windows,
                                                    const data::MultivariateSeries& series, double lambda,
                                                    AugmentMode mode, const SolverOptions& options,
                                                    AugmentStats* stats) {
  check_windows(windows, lambda);
  const auto sources = trend_sources(series.n_channels(), mode);
  std::vector<std::vector<double>> trends;
  std::size_t bad = 0;
  for (auto c : sources) {
    auto sol = solve(series.channel(c), lambda, options);
    if (!sol.converged) ++bad;
    trends.push_back(std::move(sol.x));
  }
  std::vector<data::Window> out;
  out.reserve(windows.size());
  for (const auto& w : windows) {
    if (w.origin_index + w.input_steps > series.length()) throw ShapeError("window outside series");
    data::Window a = w;
    a.channels = w.channels + sources.size();
    a.inputs.resize(a.channels * w.input_steps);
    for (std::size_t s = 0; s < sources.size(); ++s) {
      std::copy_n(trends[s].begin() + static_cast<std::ptrdiff_t>(w.origin_index), w.input_steps,
                  a.channel(w.channels + s).begin());
    }
    out.push_back(std::move(a));
  }
  if (stats) {
    stats->solves += sources.size();
    stats->nonconverged += bad;
  }
  return out;
}

}  // namespace trendfx::l1tf
