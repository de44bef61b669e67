#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "leadsheet/kernels/gemm.h"
#include "leadsheet/rng.h"

namespace leadsheet::kernels {
namespace {

std::vector<double> random_values(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-1, 1);
  return v;
}

// Oracle: textbook triple loop over explicitly indexed operands.
double at(const std::vector<double>& m, int cols, int r, int c) {
  return m[static_cast<std::size_t>(r) * cols + c];
}

struct Shape {
  int m, k, n;
};

class GemmTest : public ::testing::TestWithParam<Shape> {};

TEST_P(GemmTest, MatchesNaiveOracle) {
  const auto [m, k, n] = GetParam();
  Rng rng(static_cast<std::uint64_t>(m * 10007 + k * 101 + n));
  const auto a = random_values(rng, static_cast<std::size_t>(m) * k);
  const auto b = random_values(rng, static_cast<std::size_t>(k) * n);
  const auto bt = random_values(rng, static_cast<std::size_t>(n) * k);
  const auto am = random_values(rng, static_cast<std::size_t>(m) * n);
  const auto seed = random_values(rng, static_cast<std::size_t>(m) * n);

  std::vector<double> c(static_cast<std::size_t>(m) * n);
  gemm(a.data(), b.data(), c.data(), m, k, n, false);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double want = 0;
      for (int p = 0; p < k; ++p) want += at(a, k, i, p) * at(b, n, p, j);
      EXPECT_NEAR(c[static_cast<std::size_t>(i) * n + j], want, 1e-12);
    }
  }

  std::vector<double> cnt = seed;
  gemm_nt(a.data(), bt.data(), cnt.data(), m, k, n, true);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double want = at(seed, n, i, j);
      for (int p = 0; p < k; ++p) want += at(a, k, i, p) * at(bt, k, j, p);
      EXPECT_NEAR(cnt[static_cast<std::size_t>(i) * n + j], want, 1e-12);
    }
  }

  // A^T * M where A is m x k and M is m x n gives k x n.
  std::vector<double> ctn(static_cast<std::size_t>(k) * n, 7.0);
  gemm_tn(a.data(), am.data(), ctn.data(), m, k, n, false);
  for (int r = 0; r < k; ++r) {
    for (int j = 0; j < n; ++j) {
      double want = 0;
      for (int i = 0; i < m; ++i) want += at(a, k, i, r) * at(am, n, i, j);
      EXPECT_NEAR(ctn[static_cast<std::size_t>(r) * n + j], want, 1e-12);
    }
  }
}

TEST_P(GemmTest, ParallelIsBitIdenticalToSerial) {
  const auto [m, k, n] = GetParam();
  Rng rng(99);
  const auto a = random_values(rng, static_cast<std::size_t>(m) * k);
  const auto b = random_values(rng, static_cast<std::size_t>(k) * n);
  const auto bt = random_values(rng, static_cast<std::size_t>(n) * k);
  const auto am = random_values(rng, static_cast<std::size_t>(m) * n);
  std::vector<double> s(static_cast<std::size_t>(m) * n), p(s.size());
  serial::gemm(a.data(), b.data(), s.data(), m, k, n, false);
  parallel::gemm(a.data(), b.data(), p.data(), m, k, n, false);
  EXPECT_EQ(s, p);
  serial::gemm_nt(a.data(), bt.data(), s.data(), m, k, n, true);
  parallel::gemm_nt(a.data(), bt.data(), p.data(), m, k, n, true);
  EXPECT_EQ(s, p);
  std::vector<double> st(static_cast<std::size_t>(k) * n), pt(st.size());
  serial::gemm_tn(a.data(), am.data(), st.data(), m, k, n, false);
  parallel::gemm_tn(a.data(), am.data(), pt.data(), m, k, n, false);
  EXPECT_EQ(st, pt);
}

INSTANTIATE_TEST_SUITE_P(Shapes, GemmTest,
                         ::testing::Values(Shape{1, 1, 1}, Shape{3, 5, 2}, Shape{1, 64, 256},
                                           Shape{17, 31, 9}, Shape{64, 128, 64},
                                           Shape{130, 70, 90}));

TEST(Gemm, DispatchFollowsSwitch) {
  Rng rng(3);
  const int m = 40, k = 40, n = 40;
  const auto a = random_values(rng, m * k);
  const auto b = random_values(rng, k * n);
  std::vector<double> on(m * n), off(m * n);
  set_parallel(true);
  EXPECT_TRUE(parallel_enabled());
  gemm(a.data(), b.data(), on.data(), m, k, n, false);
  set_parallel(false);
  EXPECT_FALSE(parallel_enabled());
  gemm(a.data(), b.data(), off.data(), m, k, n, false);
  set_parallel(true);
  EXPECT_EQ(on, off);
}

TEST(Gemm, FloatInstantiation) {
  const float a[] = {1, 2, 3, 4};
  const float b[] = {5, 6, 7, 8};
  float c[4];
  gemm(a, b, c, 2, 2, 2, false);
  EXPECT_FLOAT_EQ(c[0], 19);
  EXPECT_FLOAT_EQ(c[1], 22);
  EXPECT_FLOAT_EQ(c[2], 43);
  EXPECT_FLOAT_EQ(c[3], 50);
}

TEST(Gemm, NanPropagates) {
  const double a[] = {0.0, 1.0};
  const double b[] = {std::numeric_limits<double>::quiet_NaN(), 1.0};
  double c[1];
  gemm(a, b, c, 1, 2, 1, false);
  EXPECT_TRUE(std::isnan(c[0]));
}

}  // namespace
}  // namespace leadsheet::kernels
