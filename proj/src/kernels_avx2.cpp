#include "explorer/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace explorer::kernels {

namespace {

// No FMA here: per-lane mul-then-add rounds exactly like the scalar loop,
// so elementwise kernels stay bit-identical across backends.
void axpy_avx2(int n, double a, const double* x, double* y) {
  const __m256d av = _mm256_set1_pd(a);
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xv = _mm256_loadu_pd(x + i);
    const __m256d yv = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(y + i, _mm256_add_pd(yv, _mm256_mul_pd(av, xv)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void add_avx2(int n, const double* x, double* y) {
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xv = _mm256_loadu_pd(x + i);
    const __m256d yv = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(y + i, _mm256_add_pd(yv, xv));
  }
  for (; i < n; ++i) y[i] += x[i];
}

void scale_avx2(int n, double a, double* x) {
  const __m256d av = _mm256_set1_pd(a);
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(x + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) x[i] *= a;
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(int n, const double* x, const double* y) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  int i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double sum_avx2(int n, const double* x) {
  __m256d acc0 = _mm256_setzero_pd();
  int i = 0;
  for (; i + 4 <= n; i += 4) acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
  double acc = hsum(acc0);
  for (; i < n; ++i) acc += x[i];
  return acc;
}

// y += a * x, fused; gemm inner loop only (reassociates vs scalar).
inline void fma_axpy(int n, double a, const double* x, double* y) {
  const __m256d av = _mm256_set1_pd(a);
  int i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d y0 = _mm256_loadu_pd(y + i);
    const __m256d y1 = _mm256_loadu_pd(y + i + 4);
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), y0));
    _mm256_storeu_pd(y + i + 4, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i + 4), y1));
  }
  for (; i + 4 <= n; i += 4) {
    const __m256d y0 = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), y0));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void gemm_nn_avx2(int m, int k, int n, const double* A, const double* B, double* C) {
  for (int i = 0; i < m; ++i) {
    const double* a_row = A + static_cast<size_t>(i) * k;
    double* c_row = C + static_cast<size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      fma_axpy(n, a_row[p], B + static_cast<size_t>(p) * n, c_row);
    }
  }
}

void gemm_nt_avx2(int m, int k, int n, const double* A, const double* B, double* C) {
  for (int i = 0; i < m; ++i) {
    const double* a_row = A + static_cast<size_t>(i) * k;
    double* c_row = C + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      c_row[j] += dot_avx2(k, a_row, B + static_cast<size_t>(j) * k);
    }
  }
}

void gemm_tn_avx2(int m, int k, int n, const double* A, const double* B, double* C) {
  for (int p = 0; p < k; ++p) {
    const double* a_row = A + static_cast<size_t>(p) * m;
    const double* b_row = B + static_cast<size_t>(p) * n;
    for (int i = 0; i < m; ++i) {
      fma_axpy(n, a_row[i], b_row, C + static_cast<size_t>(i) * n);
    }
  }
}

const Backend kAvx2 = {
    "avx2",   axpy_avx2,    add_avx2,     scale_avx2,   dot_avx2,
    sum_avx2, gemm_nn_avx2, gemm_nt_avx2, gemm_tn_avx2,
};

}  // namespace

const Backend* avx2_backend() {
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
    return &kAvx2;
  }
  return nullptr;
}

}  // namespace explorer::kernels

#else

namespace explorer::kernels {
const Backend* avx2_backend() { return nullptr; }
}  // namespace explorer::kernels

#endif
