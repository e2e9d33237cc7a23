#pragma once

// Data-parallel inner loops used by the tensor core. Each kernel has a scalar
// reference implementation and, on x86-64, an AVX2/FMA variant. The active set
// is chosen once per process from CPUID and can be pinned with DRC_KERNELS=scalar|avx2.

#include <cstddef>
#include <string_view>

namespace drc::kernels {

struct KernelTable {
  std::string_view name;

  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum)(const double* a, std::size_t n);
  double (*max)(const double* a, std::size_t n);  // n > 0
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out = a + b, out = a - b, out = a * b (elementwise)
  void (*add)(const double* a, const double* b, double* out, std::size_t n);
  void (*sub)(const double* a, const double* b, double* out, std::size_t n);
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);
  // out = alpha * a
  void (*scale)(double alpha, const double* a, double* out, std::size_t n);
  void (*relu)(const double* a, double* out, std::size_t n);
  // g_in += (x > 0) ? g_out : 0
  void (*relu_backward)(const double* x, const double* g_out, double* g_in, std::size_t n);

  // Row-major GEMM, accumulating into C.
  // gemm_nn: C[m×n] += A[m×k] · B[k×n]
  void (*gemm_nn)(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                  std::size_t n);
  // gemm_nt: C[m×n] += A[m×k] · B[n×k]ᵀ
  void (*gemm_nt)(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                  std::size_t n);
  // gemm_tn: C[m×n] += A[k×m]ᵀ · B[k×n]
  void (*gemm_tn)(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                  std::size_t n);
};

const KernelTable& scalar_kernels();

/// nullptr when the AVX2 variants were not compiled in.
const KernelTable* avx2_kernels();

bool cpu_supports_avx2();

/// The table selected for this process.
const KernelTable& active();

/// Override the selection ("scalar", "avx2" or "auto"). Returns false if the
/// requested variant is unavailable on this build or CPU.
bool select(std::string_view which);

}  // namespace drc::kernels
