#pragma once

#include <cstddef>

// Double-precision kernels behind the network's dense inner loops. A scalar
// reference table always exists; on x86 an AVX2+FMA table is selected at
// runtime when the CPU supports it. Elementwise kernels (axpy/add/scale) are
// bit-identical across backends; reductions and gemm reassociate and are
// equivalence-tested against scalar to tight tolerances instead.
namespace explorer::kernels {

struct Backend {
  const char* name;

  // y += a * x
  void (*axpy)(int n, double a, const double* x, double* y);
  // y += x
  void (*add)(int n, const double* x, double* y);
  // x *= a
  void (*scale)(int n, double a, double* x);
  double (*dot)(int n, const double* x, const double* y);
  double (*sum)(int n, const double* x);

  // Row-major, accumulating: C[m x n] += op(A) * op(B).
  // nn: A[m x k],   B[k x n]
  // nt: A[m x k],   B[n x k] (B transposed)
  // tn: A[k x m]^T, B[k x n]
  void (*gemm_nn)(int m, int k, int n, const double* A, const double* B, double* C);
  void (*gemm_nt)(int m, int k, int n, const double* A, const double* B, double* C);
  void (*gemm_tn)(int m, int k, int n, const double* A, const double* B, double* C);
};

const Backend& scalar_backend();

// AVX2+FMA table; only returned by active() when the CPU supports it.
// Null on non-x86 builds.
const Backend* avx2_backend();

// Runtime-selected table. EXPLORER_FORCE_SCALAR=1 pins the scalar table.
const Backend& active();

// Test/benchmark hook.
void set_active(const Backend& backend);

}  // namespace explorer::kernels
