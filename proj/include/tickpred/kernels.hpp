#pragma once

// Dense double-precision kernels used by the nn/training hot loops.
// Each operation has a scalar reference implementation and, on x86 with AVX2,
// a vectorized variant; the backend is chosen once at runtime (CPU detection,
// overridable via TICKPRED_KERNELS=scalar|avx2|auto or select_backend()).

#include <cstddef>
#include <string>

namespace tickpred::kern {

struct Kernels {
  const char* name;

  // y = W x            (W is rows x cols, row-major)
  void (*matvec)(const double* w, std::size_t rows, std::size_t cols,
                 const double* x, double* y);
  // x += W^T y         (accumulating transpose product)
  void (*matvec_t_acc)(const double* w, std::size_t rows, std::size_t cols,
                       const double* y, double* x);
  // G += y x^T         (rank-1 accumulate, G is rows x cols row-major)
  void (*ger_acc)(double* g, std::size_t rows, std::size_t cols,
                  const double* y, const double* x);
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y = x >= 0 ? x : slope * x
  void (*leaky_relu)(const double* x, double* y, std::size_t n, double slope);
  // dx = dy * (x >= 0 ? 1 : slope)   (x is the pre-activation)
  void (*leaky_relu_grad)(const double* x, const double* dy, double* dx,
                          std::size_t n, double slope);
  // Adam with precomputed bias corrections c1 = 1/(1-b1^t), c2 = 1/(1-b2^t):
  //   m = b1 m + (1-b1) g;  v = b2 v + (1-b2) g^2
  //   p -= lr * (m * c1) / (sqrt(v * c2) + eps)
  void (*adam_update)(double* p, const double* g, double* m, double* v,
                      std::size_t n, double lr, double b1, double b2,
                      double eps, double c1, double c2);
  void (*scale)(double* x, std::size_t n, double a);
};

enum class Backend { kAuto, kScalar, kAvx2 };

/// Active kernel table (selected on first use).
const Kernels& active();

/// Force a backend. Throws PipelineError if unavailable on this CPU.
void select_backend(Backend b);

/// Backend tables for equivalence testing. avx2_kernels() returns nullptr
/// when the build or CPU lacks AVX2 support.
const Kernels* scalar_kernels();
const Kernels* avx2_kernels();

bool cpu_has_avx2();
std::string backend_name();

}  // namespace tickpred::kern
