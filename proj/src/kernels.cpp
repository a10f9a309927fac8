#include "explorer/kernels.hpp"

#include <atomic>
#include <cstdlib>

namespace explorer::kernels {

namespace {

void axpy_scalar(int n, double a, const double* x, double* y) {
  for (int i = 0; i < n; ++i) y[i] += a * x[i];
}

void add_scalar(int n, const double* x, double* y) {
  for (int i = 0; i < n; ++i) y[i] += x[i];
}

void scale_scalar(int n, double a, double* x) {
  for (int i = 0; i < n; ++i) x[i] *= a;
}

double dot_scalar(int n, const double* x, const double* y) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double sum_scalar(int n, const double* x) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += x[i];
  return acc;
}

void gemm_nn_scalar(int m, int k, int n, const double* A, const double* B, double* C) {
  for (int i = 0; i < m; ++i) {
    const double* a_row = A + static_cast<size_t>(i) * k;
    double* c_row = C + static_cast<size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      const double a = a_row[p];
      const double* b_row = B + static_cast<size_t>(p) * n;
      for (int j = 0; j < n; ++j) c_row[j] += a * b_row[j];
    }
  }
}

void gemm_nt_scalar(int m, int k, int n, const double* A, const double* B, double* C) {
  for (int i = 0; i < m; ++i) {
    const double* a_row = A + static_cast<size_t>(i) * k;
    double* c_row = C + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      c_row[j] += dot_scalar(k, a_row, B + static_cast<size_t>(j) * k);
    }
  }
}

void gemm_tn_scalar(int m, int k, int n, const double* A, const double* B, double* C) {
  for (int p = 0; p < k; ++p) {
    const double* a_row = A + static_cast<size_t>(p) * m;
    const double* b_row = B + static_cast<size_t>(p) * n;
    for (int i = 0; i < m; ++i) {
      const double a = a_row[i];
      double* c_row = C + static_cast<size_t>(i) * n;
      for (int j = 0; j < n; ++j) c_row[j] += a * b_row[j];
    }
  }
}

const Backend kScalar = {
    "scalar",  axpy_scalar,    add_scalar,     scale_scalar,  dot_scalar,
    sum_scalar, gemm_nn_scalar, gemm_nt_scalar, gemm_tn_scalar,
};

const Backend* select_backend() {
  if (const char* env = std::getenv("EXPLORER_FORCE_SCALAR")) {
    if (env[0] == '1') return &kScalar;
  }
  if (const Backend* avx2 = avx2_backend()) return avx2;
  return &kScalar;
}

std::atomic<const Backend*> g_active{nullptr};

}  // namespace

const Backend& scalar_backend() { return kScalar; }

const Backend& active() {
  const Backend* b = g_active.load(std::memory_order_acquire);
  if (!b) {
    b = select_backend();
    g_active.store(b, std::memory_order_release);
  }
  return *b;
}

void set_active(const Backend& backend) {
  g_active.store(&backend, std::memory_order_release);
}

}  // namespace explorer::kernels
