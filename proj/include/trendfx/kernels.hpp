#pragma once

// Dense row-major matrix kernels used by the autodiff engine.
//
// Every kernel exists twice: `serial::` is the plain reference loop nest and
// `parallel::` splits output rows across OpenMP threads. Each output element
// is reduced by exactly one thread in the same order as the serial loop, so
// both variants are bitwise identical. The unqualified entry points pick the
// parallel variant for large problems.

#include <cstddef>

namespace trendfx::kernels {


struct Conv1dShape {
  std::size_t batch = 1;
  std::size_t in_channels = 1;
  std::size_t length = 1;
  std::size_t out_channels = 1;
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::size_t padding = 0;

  std::size_t out_length() const { return (length + 2 * padding - kernel) / stride + 1; }
};

// x: batch x in_channels x length; w: out_channels x in_channels x kernel;
// y: batch x out_channels x out_length. Zero padding on both ends.
namespace serial {
// C[m x n] (+)= A[m x k] * B[k x n]
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c,
             bool accumulate);
// C[m x n] (+)= A[m x k] * B[n x k]^T
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c,
             bool accumulate);
// C[m x n] (+)= A[k x m]^T * B[k x n]
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c,
             bool accumulate);
void conv1d_forward(const Conv1dShape& s, const double* x, const double* w, const double* bias, double* y);
void conv1d_backward_input(const Conv1dShape& s, const double* dy, const double* w, double* dx);
void conv1d_backward_weight(const Conv1dShape& s, const double* dy, const double* x, double* dw);
}  // namespace serial

namespace parallel {
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c,
             bool accumulate);
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c,
             bool accumulate);
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c,
             bool accumulate);
void conv1d_forward(const Conv1dShape& s, const double* x, const double* w, const double* bias, double* y);
void conv1d_backward_input(const Conv1dShape& s, const double* dy, const double* w, double* dx);
void conv1d_backward_weight(const Conv1dShape& s, const double* dy, const double* x, double* dw);
}  // namespace parallel

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c,
             bool accumulate = false);
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c,
             bool accumulate = false);
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c,
             bool accumulate = false);

// dx and dw accumulate; y is overwritten. bias may be null.
void conv1d_forward(const Conv1dShape& s, const double* x, const double* w, const double* bias, double* y);
void conv1d_backward_input(const Conv1dShape& s, const double* dy, const double* w, double* dx);
void conv1d_backward_weight(const Conv1dShape& s, const double* dy, const double* x, double* dw);

// Multiply-adds below which the dispatcher stays serial.
inline constexpr std::size_t kParallelThreshold = 1u << 16;

// Number of threads the parallel kernels will use.
int max_threads();

}  // namespace trendfx::kernels
