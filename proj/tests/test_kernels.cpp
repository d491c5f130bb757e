#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "trendfx/kernels.hpp"

using namespace trendfx::kernels;

namespace {

std::vector<double> rand_vec(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return oracle::normal_vector(n, rng);
}

Eigen::MatrixXd as_matrix(const std::vector<double>& v, std::size_t r, std::size_t c) {
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      v.data(), static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
}

}  // namespace

TEST(Gemm, MatchesEigen) {
  const std::size_t m = 37, n = 23, k = 19;
  const auto a = rand_vec(m * k, 1), b = rand_vec(k * n, 2), bt = rand_vec(n * k, 3), at = rand_vec(k * m, 4);
  std::vector<double> c(m * n);
  gemm_nn(m, n, k, a.data(), b.data(), c.data());
  EXPECT_LT((as_matrix(c, m, n) - as_matrix(a, m, k) * as_matrix(b, k, n)).cwiseAbs().maxCoeff(), 1e-12);
  gemm_nt(m, n, k, a.data(), bt.data(), c.data());
  EXPECT_LT((as_matrix(c, m, n) - as_matrix(a, m, k) * as_matrix(bt, n, k).transpose()).cwiseAbs().maxCoeff(), 1e-12);
  gemm_tn(m, n, k, at.data(), b.data(), c.data());
  EXPECT_LT((as_matrix(c, m, n) - as_matrix(at, k, m).transpose() * as_matrix(b, k, n)).cwiseAbs().maxCoeff(), 1e-12);
  const auto before = c;
  gemm_tn(m, n, k, at.data(), b.data(), c.data(), true);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(c[i], 2 * before[i], 1e-12);
}

TEST(Gemm, SerialAndParallelBitwiseEqual) {
  const std::size_t m = 130, n = 70, k = 90;
  const auto a = rand_vec(m * k, 5), b = rand_vec(k * n, 6), bt = rand_vec(n * k, 7), at = rand_vec(k * m, 8);
  std::vector<double> s(m * n), p(m * n);
  serial::gemm_nn(m, n, k, a.data(), b.data(), s.data(), false);
  parallel::gemm_nn(m, n, k, a.data(), b.data(), p.data(), false);
  EXPECT_EQ(s, p);
  serial::gemm_nt(m, n, k, a.data(), bt.data(), s.data(), false);
  parallel::gemm_nt(m, n, k, a.data(), bt.data(), p.data(), false);
  EXPECT_EQ(s, p);
  serial::gemm_tn(m, n, k, at.data(), b.data(), s.data(), true);
  parallel::gemm_tn(m, n, k, at.data(), b.data(), p.data(), true);
  EXPECT_EQ(s, p);
}

TEST(Conv1d, MatchesDirectSum) {
  Conv1dShape s{.batch = 2, .in_channels = 3, .length = 20, .out_channels = 4, .kernel = 5, .stride = 2, .padding = 1};
  const auto x = rand_vec(2 * 3 * 20, 9), w = rand_vec(4 * 3 * 5, 10), bias = rand_vec(4, 11);
  const std::size_t L = s.out_length();
  std::vector<double> y(2 * 4 * L);
  conv1d_forward(s, x.data(), w.data(), bias.data(), y.data());
  for (std::size_t b = 0; b < 2; ++b) {
    for (std::size_t o = 0; o < 4; ++o) {
      for (std::size_t t = 0; t < L; ++t) {
        double ref = bias[o];
        for (std::size_t c = 0; c < 3; ++c) {
          for (std::size_t j = 0; j < 5; ++j) {
            const long pos = static_cast<long>(t * 2 + j) - 1;
            if (pos < 0 || pos >= 20) continue;
            ref += w[(o * 3 + c) * 5 + j] * x[(b * 3 + c) * 20 + static_cast<std::size_t>(pos)];
          }
        }
        EXPECT_NEAR(y[(b * 4 + o) * L + t], ref, 1e-12);
      }
    }
  }
}

TEST(Conv1d, SerialAndParallelBitwiseEqual) {
  Conv1dShape s{.batch = 8, .in_channels = 6, .length = 64, .out_channels = 16, .kernel = 7, .stride = 1, .padding = 0};
  const std::size_t L = s.out_length();
  const auto x = rand_vec(8 * 6 * 64, 12), w = rand_vec(16 * 6 * 7, 13), bias = rand_vec(16, 14),
             dy = rand_vec(8 * 16 * L, 15);
  std::vector<double> ys(8 * 16 * L), yp(ys.size());
  serial::conv1d_forward(s, x.data(), w.data(), bias.data(), ys.data());
  parallel::conv1d_forward(s, x.data(), w.data(), bias.data(), yp.data());
  EXPECT_EQ(ys, yp);
  std::vector<double> dxs(x.size(), 0.5), dxp(x.size(), 0.5);
  serial::conv1d_backward_input(s, dy.data(), w.data(), dxs.data());
  parallel::conv1d_backward_input(s, dy.data(), w.data(), dxp.data());
  EXPECT_EQ(dxs, dxp);
  std::vector<double> dws(w.size(), 0.0), dwp(w.size(), 0.0);
  serial::conv1d_backward_weight(s, dy.data(), x.data(), dws.data());
  parallel::conv1d_backward_weight(s, dy.data(), x.data(), dwp.data());
  EXPECT_EQ(dws, dwp);
}

TEST(Threads, AtLeastOne) { EXPECT_GE(max_threads(), 1); }
