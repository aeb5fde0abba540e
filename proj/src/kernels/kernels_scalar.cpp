// Scalar reference kernels. These define the semantics the AVX2 path must
// reproduce; keep them simple enough to audit by eye.

#include "kernels_impl.hpp"

#include <cmath>

namespace qcert::kernels::detail {

double scalar_dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s = std::fma(x[i], y[i], s);
  return s;
}

void scalar_axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void scalar_scale(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void scalar_gemm_acc(const double* a, const double* b, double* c,
                     std::size_t m, std::size_t k, std::size_t n) {
  // ikj order: each C row is a sum of scaled B rows, which vectorizes and
  // keeps the per-element operation identical to axpy.
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    const double* ai = a + i * k;
    for (std::size_t l = 0; l < k; ++l) {
      const double ail = ai[l];
      if (ail == 0.0) continue;  // sparse-ish blocks are common in the SDP
      scalar_axpy(ail, b + l * n, ci, n);
    }
  }
}

}  // namespace qcert::kernels::detail
