#pragma once
// Dense floating-point kernels used by the linear algebra and SDP layers.
// Two implementations are compiled: a scalar reference and an AVX2+FMA
// variant; the dispatcher picks one at runtime from CPU capabilities.
// Elementwise kernels (axpy, gemm_acc) use fused multiply-add in both
// paths, so scalar and AVX2 results agree bit for bit; dot products
// accumulate in lanes and may differ by reassociation rounding only.

#include <cstddef>

namespace qcert::kernels {

// sum_i x[i]*y[i]
double dot(const double* x, const double* y, std::size_t n);

// y[i] += a*x[i]
void axpy(double a, const double* x, double* y, std::size_t n);

// x[i] *= a
void scale(double a, double* x, std::size_t n);

// C (m x n, row-major) += A (m x k) * B (k x n)
void gemm_acc(const double* a, const double* b, double* c,
              std::size_t m, std::size_t k, std::size_t n);

// name of the implementation currently in use: "avx2" or "scalar"
const char* active_isa();

// force an implementation ("scalar", "avx2", "auto"); returns false if the
// requested ISA is unavailable on this machine (selection then unchanged).
// Intended for tests and benchmarks.
bool select_isa(const char* name);

}  // namespace qcert::kernels
