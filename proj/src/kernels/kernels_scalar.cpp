// Scalar reference kernels. These are the semantic ground truth the SIMD
// variants are equivalence-tested against.

#include <cmath>
#include <cstddef>

#include "tickpred/kernels.hpp"

namespace tickpred::kern {
namespace {

void matvec_scalar(const double* w, std::size_t rows, std::size_t cols,
                   const double* x, double* y) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = w + i * cols;
    double acc = 0.0;
    for (std::size_t j = 0; j < cols; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
}

void matvec_t_acc_scalar(const double* w, std::size_t rows, std::size_t cols,
                         const double* y, double* x) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = w + i * cols;
    const double yi = y[i];
    for (std::size_t j = 0; j < cols; ++j) x[j] += row[j] * yi;
  }
}

void ger_acc_scalar(double* g, std::size_t rows, std::size_t cols,
                    const double* y, const double* x) {
  for (std::size_t i = 0; i < rows; ++i) {
    double* row = g + i * cols;
    const double yi = y[i];
    for (std::size_t j = 0; j < cols; ++j) row[j] += yi * x[j];
  }
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void leaky_relu_scalar(const double* x, double* y, std::size_t n, double slope) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] >= 0.0 ? x[i] : slope * x[i];
}

void leaky_relu_grad_scalar(const double* x, const double* dy, double* dx,
                            std::size_t n, double slope) {
  for (std::size_t i = 0; i < n; ++i) dx[i] = dy[i] * (x[i] >= 0.0 ? 1.0 : slope);
}

void adam_update_scalar(double* p, const double* g, double* m, double* v,
                        std::size_t n, double lr, double b1, double b2,
                        double eps, double c1, double c2) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
    p[i] -= lr * (m[i] * c1) / (std::sqrt(v[i] * c2) + eps);
  }
}

void scale_scalar(double* x, std::size_t n, double a) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

const Kernels kScalar = {
    "scalar",
    matvec_scalar,
    matvec_t_acc_scalar,
    ger_acc_scalar,
    axpy_scalar,
    dot_scalar,
    leaky_relu_scalar,
    leaky_relu_grad_scalar,
    adam_update_scalar,
    scale_scalar,
};

}  // namespace

const Kernels* scalar_kernels() { return &kScalar; }

}  // namespace tickpred::kern
