#include <cmath>

#include "atlas/kernels/kernels.hpp"

// Reference kernels. Loop orders are chosen so that per-element accumulation
// order matches the vector variants lane-for-lane; the AVX2 build differs
// only through FMA contraction and vectorized reduction trees.
namespace atlas::kernels {
namespace {

void gemm_nn_scalar(int64_t m, int64_t n, int64_t k, const double* a, const double* b,
                    double beta, double* c) {
  for (int64_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    if (beta == 0.0) {
      for (int64_t j = 0; j < n; ++j) crow[j] = 0.0;
    }
    const double* arow = a + i * k;
    for (int64_t p = 0; p < k; ++p) {
      const double aip = arow[p];
      if (aip == 0.0) continue;
      const double* brow = b + p * n;
      for (int64_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
}

void axpy_scalar(int64_t n, double alpha, const double* x, double* y) {
  for (int64_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void vadd_scalar(int64_t n, const double* x, const double* y, double* out) {
  for (int64_t i = 0; i < n; ++i) out[i] = x[i] + y[i];
}

void vscale_scalar(int64_t n, double alpha, double* x) {
  for (int64_t i = 0; i < n; ++i) x[i] *= alpha;
}

void relu_scalar(int64_t n, const double* x, double* y) {
  for (int64_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_grad_scalar(int64_t n, const double* x, const double* dy, double* dx) {
  for (int64_t i = 0; i < n; ++i) {
    if (x[i] > 0.0) dx[i] += dy[i];
  }
}

double dot_scalar(int64_t n, const double* x, const double* y) {
  double acc = 0.0;
  for (int64_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double vsum_scalar(int64_t n, const double* x) {
  double acc = 0.0;
  for (int64_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

bool all_finite_scalar(int64_t n, const double* x) {
  for (int64_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i])) return false;
  }
  return true;
}

void adam_update_scalar(int64_t n, double* p, const double* g, double* m, double* v,
                        double lr, double beta1, double beta2, double eps, double bc1,
                        double bc2) {
  for (int64_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

}  // namespace

const Ops& scalar() {
  static const Ops table{
      "scalar",       gemm_nn_scalar, axpy_scalar,       vadd_scalar,
      vscale_scalar,  relu_scalar,    relu_grad_scalar,  dot_scalar,
      vsum_scalar,    all_finite_scalar, adam_update_scalar,
  };
  return table;
}

}  // namespace atlas::kernels
