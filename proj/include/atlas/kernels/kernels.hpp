#pragma once

#include <cstdint>

// Dense f64 inner loops used by the tensor engine. Each kernel has a scalar
// reference implementation and an AVX2+FMA variant; the active table is
// selected once at startup from cpuid (override with ATLAS_KERNELS=scalar|avx2).
// The two variants are equivalence-tested against each other in
// tests/test_kernels.cpp: lane-order-preserving ops bitwise, reductions and
// FMA-contracted ops to tight tolerance.
namespace atlas::kernels {

struct Ops {
  const char* name;

  // c = a (m x k) * b (k x n) + beta * c, row-major. beta is 0 or 1.
  void (*gemm_nn)(int64_t m, int64_t n, int64_t k, const double* a, const double* b,
                  double beta, double* c);

  // y += alpha * x
  void (*axpy)(int64_t n, double alpha, const double* x, double* y);

  // out = x + y
  void (*vadd)(int64_t n, const double* x, const double* y, double* out);

  // x *= alpha
  void (*vscale)(int64_t n, double alpha, double* x);

  // y = max(x, 0)
  void (*relu)(int64_t n, const double* x, double* y);

  // dx += dy where x > 0
  void (*relu_grad)(int64_t n, const double* x, const double* dy, double* dx);

  double (*dot)(int64_t n, const double* x, const double* y);

  double (*vsum)(int64_t n, const double* x);

  bool (*all_finite)(int64_t n, const double* x);

  // One Adam step over a flat parameter block. bc1/bc2 are the bias
  // corrections 1 - beta^t, precomputed by the caller.
  void (*adam_update)(int64_t n, double* p, const double* g, double* m, double* v,
                      double lr, double beta1, double beta2, double eps, double bc1,
                      double bc2);
};

const Ops& scalar();

// nullptr when the binary or the CPU lacks AVX2/FMA support.
const Ops* avx2();

const Ops& active();

}  // namespace atlas::kernels
