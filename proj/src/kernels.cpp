#include "trendfx/kernels.hpp"

#include <omp.h>

#include <algorithm>

namespace trendfx::kernels {

namespace {

inline void gemm_nn_row(std::size_t i, std::size_t n, std::size_t k, const double* a, const double* b,
                        double* c, bool accumulate) {
  double* crow = c + i * n;
  if (!accumulate) std::fill(crow, crow + n, 0.0);
  const double* arow = a + i * k;
  for (std::size_t p = 0; p < k; ++p) {
    const double av = arow[p];
    if (av == 0.0) continue;
    const double* brow = b + p * n;
    for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
  }
}

inline void gemm_nt_row(std::size_t i, std::size_t n, std::size_t k, const double* a, const double* b,
                        double* c, bool accumulate) {
  const double* arow = a + i * k;
  double* crow = c + i * n;
  for (std::size_t j = 0; j < n; ++j) {
    const double* brow = b + j * k;
    double s = 0.0;
    for (std::size_t p = 0; p < k; ++p) s += arow[p] * brow[p];
    crow[j] = accumulate ? crow[j] + s : s;
  }
}

inline void gemm_tn_row(std::size_t i, std::size_t m, std::size_t n, std::size_t k, const double* a,
                        const double* b, double* c, bool accumulate) {
  double* crow = c + i * n;
  if (!accumulate) std::fill(crow, crow + n, 0.0);
  for (std::size_t p = 0; p < k; ++p) {
    const double av = a[p * m + i];
    if (av == 0.0) continue;
    const double* brow = b + p * n;
    for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
  }
}

bool go_parallel(std::size_t m, std::size_t n, std::size_t k) {
  return m > 1 && m * n * k >= kParallelThreshold && !omp_in_parallel() && omp_get_max_threads() > 1;
}

// One output plane y[b, co, :].
inline void conv_fwd_plane(const Conv1dShape& s, std::size_t b, std::size_t co, const double* x, const double* w,
                           const double* bias, double* y) {
  const std::size_t lout = s.out_length();
  double* yp = y + (b * s.out_channels + co) * lout;
  const double b0 = bias ? bias[co] : 0.0;
  for (std::size_t t = 0; t < lout; ++t) {
    double acc = b0;
    for (std::size_t ci = 0; ci < s.in_channels; ++ci) {
      const double* xp = x + (b * s.in_channels + ci) * s.length;
      const double* wp = w + (co * s.in_channels + ci) * s.kernel;
      for (std::size_t j = 0; j < s.kernel; ++j) {
        const std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(t * s.stride + j) - static_cast<std::ptrdiff_t>(s.padding);
        if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(s.length)) continue;
        acc += wp[j] * xp[pos];
      }
    }
    yp[t] = acc;
  }
}

// Gradient plane dx[b, ci, :].
inline void conv_bwd_input_plane(const Conv1dShape& s, std::size_t b, std::size_t ci, const double* dy,
                                 const double* w, double* dx) {
  const std::size_t lout = s.out_length();
  double* dxp = dx + (b * s.in_channels + ci) * s.length;
  for (std::size_t co = 0; co < s.out_channels; ++co) {
    const double* dyp = dy + (b * s.out_channels + co) * lout;
    const double* wp = w + (co * s.in_channels + ci) * s.kernel;
    for (std::size_t t = 0; t < lout; ++t) {
      const double g = dyp[t];
      if (g == 0.0) continue;
      for (std::size_t j = 0; j < s.kernel; ++j) {
        const std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(t * s.stride + j) - static_cast<std::ptrdiff_t>(s.padding);
        if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(s.length)) continue;
        dxp[pos] += g * wp[j];
      }
    }
  }
}

// Gradient row dw[co, ci, :].
inline void conv_bwd_weight_row(const Conv1dShape& s, std::size_t co, std::size_t ci, const double* dy,
                                const double* x, double* dw) {
  const std::size_t lout = s.out_length();
  double* dwp = dw + (co * s.in_channels + ci) * s.kernel;
  for (std::size_t b = 0; b < s.batch; ++b) {
    const double* dyp = dy + (b * s.out_channels + co) * lout;
    const double* xp = x + (b * s.in_channels + ci) * s.length;
    for (std::size_t t = 0; t < lout; ++t) {
      const double g = dyp[t];
      if (g == 0.0) continue;
      for (std::size_t j = 0; j < s.kernel; ++j) {
        const std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(t * s.stride + j) - static_cast<std::ptrdiff_t>(s.padding);
        if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(s.length)) continue;
        dwp[j] += g * xp[pos];
      }
    }
  }
}

bool conv_parallel(const Conv1dShape& s) {
  return s.batch * s.out_channels * s.in_channels * s.kernel * s.out_length() >= kParallelThreshold &&
         !omp_in_parallel() && omp_get_max_threads() > 1;
}

}  // namespace

namespace serial {

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c,
             bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) gemm_nn_row(i, n, k, a, b, c, accumulate);
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c,
             bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) gemm_nt_row(i, n, k, a, b, c, accumulate);
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c,
             bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) gemm_tn_row(i, m, n, k, a, b, c, accumulate);
}

void conv1d_forward(const Conv1dShape& s, const double* x, const double* w, const double* bias, double* y) {
  for (std::size_t b = 0; b < s.batch; ++b)
    for (std::size_t co = 0; co < s.out_channels; ++co) conv_fwd_plane(s, b, co, x, w, bias, y);
}

void conv1d_backward_input(const Conv1dShape& s, const double* dy, const double* w, double* dx) {
  for (std::size_t b = 0; b < s.batch; ++b)
    for (std::size_t ci = 0; ci < s.in_channels; ++ci) conv_bwd_input_plane(s, b, ci, dy, w, dx);
}

void conv1d_backward_weight(const Conv1dShape& s, const double* dy, const double* x, double* dw) {
  for (std::size_t co = 0; co < s.out_channels; ++co)
    for (std::size_t ci = 0; ci < s.in_channels; ++ci) conv_bwd_weight_row(s, co, ci, dy, x, dw);
}

}  // namespace serial

namespace parallel {

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c,
             bool accumulate) {
  const auto rows = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) gemm_nn_row(static_cast<std::size_t>(i), n, k, a, b, c, accumulate);
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c,
             bool accumulate) {
  const auto rows = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) gemm_nt_row(static_cast<std::size_t>(i), n, k, a, b, c, accumulate);
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c,
             bool accumulate) {
  const auto rows = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    gemm_tn_row(static_cast<std::size_t>(i), m, n, k, a, b, c, accumulate);
  }
}

void conv1d_forward(const Conv1dShape& s, const double* x, const double* w, const double* bias, double* y) {
  const auto planes = static_cast<std::ptrdiff_t>(s.batch * s.out_channels);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < planes; ++p) {
    const auto up = static_cast<std::size_t>(p);
    conv_fwd_plane(s, up / s.out_channels, up % s.out_channels, x, w, bias, y);
  }
}

void conv1d_backward_input(const Conv1dShape& s, const double* dy, const double* w, double* dx) {
  const auto planes = static_cast<std::ptrdiff_t>(s.batch * s.in_channels);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < planes; ++p) {
    const auto up = static_cast<std::size_t>(p);
    conv_bwd_input_plane(s, up / s.in_channels, up % s.in_channels, dy, w, dx);
  }
}

void conv1d_backward_weight(const Conv1dShape& s, const double* dy, const double* x, double* dw) {
  const auto rows = static_cast<std::ptrdiff_t>(s.out_channels * s.in_channels);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < rows; ++p) {
    const auto up = static_cast<std::size_t>(p);
    conv_bwd_weight_row(s, up / s.in_channels, up % s.in_channels, dy, x, dw);
  }
}

}  // namespace parallel

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c,
             bool accumulate) {
  if (go_parallel(m, n, k)) {
    parallel::gemm_nn(m, n, k, a, b, c, accumulate);
  } else {
    serial::gemm_nn(m, n, k, a, b, c, accumulate);
  }
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c,
             bool accumulate) {
  if (go_parallel(m, n, k)) {
    parallel::gemm_nt(m, n, k, a, b, c, accumulate);
  } else {
    serial::gemm_nt(m, n, k, a, b, c, accumulate);
  }
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c,
             bool accumulate) {
  if (go_parallel(m, n, k)) {
    parallel::gemm_tn(m, n, k, a, b, c, accumulate);
  } else {
    serial::gemm_tn(m, n, k, a, b, c, accumulate);
  }
}

void conv1d_forward(const Conv1dShape& s, const double* x, const double* w, const double* bias, double* y) {
  if (conv_parallel(s)) {
    parallel::conv1d_forward(s, x, w, bias, y);
  } else {
    serial::conv1d_forward(s, x, w, bias, y);
  }
}

void conv1d_backward_input(const Conv1dShape& s, const double* dy, const double* w, double* dx) {
  if (conv_parallel(s)) {
    parallel::conv1d_backward_input(s, dy, w, dx);
  } else {
    serial::conv1d_backward_input(s, dy, w, dx);
  }
}

void conv1d_backward_weight(const Conv1dShape& s, const double* dy, const double* x, double* dw) {
  if (conv_parallel(s)) {
    parallel::conv1d_backward_weight(s, dy, x, dw);
  } else {
    serial::conv1d_backward_weight(s, dy, x, dw);
  }
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace trendfx::kernels
