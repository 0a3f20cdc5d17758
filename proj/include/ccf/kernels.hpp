#pragma once

// Dense double-precision inner loops used by the tensor ops. Every kernel has
// a scalar reference implementation; on x86-64 an AVX2/FMA variant is chosen
// at startup when the CPU supports it. Set CCF_ISA=scalar in the environment
// to force the reference path.

#include <cstddef>
#include <string_view>

namespace ccf::kernels {

enum class Isa { scalar, avx2 };

struct KernelTable {
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // C[m,n] += A[m,k] * B[k,n]
  void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                  double* c);
  // C[m,n] += A[m,k] * B[n,k]^T
  void (*gemm_nt)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                  double* c);
  // C[m,n] += A[k,m]^T * B[k,n]
  void (*gemm_tn)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                  double* c);
};

namespace scalar {
const KernelTable& table();
}

#if defined(CCF_HAVE_AVX2_KERNELS)
namespace avx2 {
const KernelTable& table();
}
#endif

bool isa_supported(Isa isa);
Isa active_isa();
// Switches the process-wide dispatch. Throws ValidationError if unsupported.
void set_isa(Isa isa);
std::string_view isa_name(Isa isa);

const KernelTable& active();

inline double dot(const double* a, const double* b, std::size_t n) { return active().dot(a, b, n); }
inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
  active().axpy(alpha, x, y, n);
}
inline void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                    double* c) {
  active().gemm_nn(m, n, k, a, b, c);
}
inline void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                    double* c) {
  active().gemm_nt(m, n, k, a, b, c);
}
inline void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                    double* c) {
  active().gemm_tn(m, n, k, a, b, c);
}

}  // namespace ccf::kernels
