#include <gtest/gtest.h>

#include "ccf/kernels.hpp"
#include "support.hpp"

namespace ccf::kernels {
namespace {

using ccf::test::random_values;

#if defined(CCF_HAVE_AVX2_KERNELS)
class KernelEquivalence : public ::testing::Test {
 protected:
  void SetUp() override {
    if (!isa_supported(Isa::avx2)) GTEST_SKIP() << "no AVX2 on this machine";
  }
  const KernelTable& ref = scalar::table();
  const KernelTable& simd = avx2::table();
};

TEST_F(KernelEquivalence, DotAndAxpy) {
  Rng rng(1);
  for (std::size_t n : {0, 1, 3, 4, 7, 8, 15, 16, 33, 100, 257}) {
    auto a = random_values(n, rng), b = random_values(n, rng);
    EXPECT_NEAR(ref.dot(a.data(), b.data(), n), simd.dot(a.data(), b.data(), n), 1e-12 * (n + 1));
    auto y1 = random_values(n, rng);
    auto y2 = y1;
    ref.axpy(0.37, a.data(), y1.data(), n);
    simd.axpy(0.37, a.data(), y2.data(), n);
    ccf::test::expect_close(y1, y2, 1e-14);
  }
}

TEST_F(KernelEquivalence, Gemm) {
  Rng rng(2);
  for (std::size_t m : {1, 3, 4, 5, 9}) {
    for (std::size_t k : {1, 2, 7, 16}) {
      for (std::size_t n : {1, 3, 4, 8, 13}) {
        const auto a = random_values(m * k, rng), b = random_values(k * n, rng);
        const auto bt = random_values(n * k, rng), at = random_values(k * m, rng);
        const auto c0 = random_values(m * n, rng);
        auto c1 = c0, c2 = c0;
        ref.gemm_nn(m, n, k, a.data(), b.data(), c1.data());
        simd.gemm_nn(m, n, k, a.data(), b.data(), c2.data());
        ccf::test::expect_close(c1, c2, 1e-12);
        c1 = c0, c2 = c0;
        ref.gemm_nt(m, n, k, a.data(), bt.data(), c1.data());
        simd.gemm_nt(m, n, k, a.data(), bt.data(), c2.data());
        ccf::test::expect_close(c1, c2, 1e-12);
        c1 = c0, c2 = c0;
        ref.gemm_tn(m, n, k, at.data(), b.data(), c1.data());
        simd.gemm_tn(m, n, k, at.data(), b.data(), c2.data());
        ccf::test::expect_close(c1, c2, 1e-12);
      }
    }
  }
}

#endif

TEST(KernelDispatch, ScalarAlwaysAvailable) {
  const Isa before = active_isa();
  set_isa(Isa::scalar);
  EXPECT_EQ(active_isa(), Isa::scalar);
  EXPECT_EQ(isa_name(Isa::scalar), "scalar");
  set_isa(before);
}

TEST(KernelDispatch, GemmMatchesNaiveLoop) {
  Rng rng(3);
  const std::size_t m = 5, k = 6, n = 7;
  const auto a = random_values(m * k, rng), b = random_values(k * n, rng);
  std::vector<double> c(m * n, 0.0);
  gemm_nn(m, n, k, a.data(), b.data(), c.data());
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      long double s = 0;
      for (std::size_t p = 0; p < k; ++p) s += static_cast<long double>(a[i * k + p]) * b[p * n + j];
      EXPECT_NEAR(c[i * n + j], static_cast<double>(s), 1e-13);
    }
  }
}

}  // namespace
}  // namespace ccf::kernels
