// AVX2+FMA variants of the dense kernels. Compiled with -mavx2 -mfma only
// when the toolchain supports it; callers go through the dispatch table and
// never reach this code on CPUs without AVX2.

#include "tickpred/kernels.hpp"

#if defined(TICKPRED_BUILD_AVX2)

#include <immintrin.h>

#include <cmath>
#include <cstddef>

namespace tickpred::kern {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

void matvec_avx2(const double* w, std::size_t rows, std::size_t cols,
                 const double* x, double* y) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = w + i * cols;
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 8 <= cols; j += 8) {
      acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(row + j), _mm256_loadu_pd(x + j), acc0);
      acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(row + j + 4), _mm256_loadu_pd(x + j + 4), acc1);
    }
    for (; j + 4 <= cols; j += 4) {
      acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(row + j), _mm256_loadu_pd(x + j), acc0);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; j < cols; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
}

void matvec_t_acc_avx2(const double* w, std::size_t rows, std::size_t cols,
                       const double* y, double* x) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = w + i * cols;
    const __m256d yi = _mm256_set1_pd(y[i]);
    std::size_t j = 0;
    for (; j + 4 <= cols; j += 4) {
      __m256d xv = _mm256_loadu_pd(x + j);
      xv = _mm256_fmadd_pd(_mm256_loadu_pd(row + j), yi, xv);
      _mm256_storeu_pd(x + j, xv);
    }
    for (; j < cols; ++j) x[j] += row[j] * y[i];
  }
}

void ger_acc_avx2(double* g, std::size_t rows, std::size_t cols,
                  const double* y, const double* x) {
  for (std::size_t i = 0; i < rows; ++i) {
    double* row = g + i * cols;
    const __m256d yi = _mm256_set1_pd(y[i]);
    std::size_t j = 0;
    for (; j + 4 <= cols; j += 4) {
      __m256d gv = _mm256_loadu_pd(row + j);
      gv = _mm256_fmadd_pd(yi, _mm256_loadu_pd(x + j), gv);
      _mm256_storeu_pd(row + j, gv);
    }
    for (; j < cols; ++j) row[j] += y[i] * x[j];
  }
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d yv = _mm256_loadu_pd(y + i);
    yv = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yv);
    _mm256_storeu_pd(y + i, yv);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void leaky_relu_avx2(const double* x, double* y, std::size_t n, double slope) {
  const __m256d sv = _mm256_set1_pd(slope);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d xv = _mm256_loadu_pd(x + i);
    __m256d neg = _mm256_mul_pd(xv, sv);
    __m256d mask = _mm256_cmp_pd(xv, zero, _CMP_GE_OQ);
    _mm256_storeu_pd(y + i, _mm256_blendv_pd(neg, xv, mask));
  }
  for (; i < n; ++i) y[i] = x[i] >= 0.0 ? x[i] : slope * x[i];
}

void leaky_relu_grad_avx2(const double* x, const double* dy, double* dx,
                          std::size_t n, double slope) {
  const __m256d sv = _mm256_set1_pd(slope);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d xv = _mm256_loadu_pd(x + i);
    __m256d mask = _mm256_cmp_pd(xv, zero, _CMP_GE_OQ);
    __m256d factor = _mm256_blendv_pd(sv, one, mask);
    _mm256_storeu_pd(dx + i, _mm256_mul_pd(_mm256_loadu_pd(dy + i), factor));
  }
  for (; i < n; ++i) dx[i] = dy[i] * (x[i] >= 0.0 ? 1.0 : slope);
}

void adam_update_avx2(double* p, const double* g, double* m, double* v,
                      std::size_t n, double lr, double b1, double b2,
                      double eps, double c1, double c2) {
  const __m256d b1v = _mm256_set1_pd(b1);
  const __m256d b2v = _mm256_set1_pd(b2);
  const __m256d ob1 = _mm256_set1_pd(1.0 - b1);
  const __m256d ob2 = _mm256_set1_pd(1.0 - b2);
  const __m256d lrv = _mm256_set1_pd(lr);
  const __m256d epsv = _mm256_set1_pd(eps);
  const __m256d c1v = _mm256_set1_pd(c1);
  const __m256d c2v = _mm256_set1_pd(c2);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d gv = _mm256_loadu_pd(g + i);
    __m256d mv = _mm256_fmadd_pd(b1v, _mm256_loadu_pd(m + i), _mm256_mul_pd(ob1, gv));
    __m256d vv = _mm256_fmadd_pd(b2v, _mm256_loadu_pd(v + i),
                                 _mm256_mul_pd(ob2, _mm256_mul_pd(gv, gv)));
    _mm256_storeu_pd(m + i, mv);
    _mm256_storeu_pd(v + i, vv);
    __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(_mm256_mul_pd(vv, c2v)), epsv);
    __m256d step = _mm256_div_pd(_mm256_mul_pd(lrv, _mm256_mul_pd(mv, c1v)), denom);
    _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
  }
  for (; i < n; ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
    p[i] -= lr * (m[i] * c1) / (std::sqrt(v[i] * c2) + eps);
  }
}

void scale_avx2(double* x, std::size_t n, double a) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), av));
  }
  for (; i < n; ++i) x[i] *= a;
}

const Kernels kAvx2 = {
    "avx2",
    matvec_avx2,
    matvec_t_acc_avx2,
    ger_acc_avx2,
    axpy_avx2,
    dot_avx2,
    leaky_relu_avx2,
    leaky_relu_grad_avx2,
    adam_update_avx2,
    scale_avx2,
};

}  // namespace

const Kernels* avx2_kernels_impl() { return &kAvx2; }

}  // namespace tickpred::kern

#else  // !TICKPRED_BUILD_AVX2

namespace tickpred::kern {
const Kernels* avx2_kernels_impl() { return nullptr; }
}  // namespace tickpred::kern

#endif
