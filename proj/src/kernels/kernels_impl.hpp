#pragma once
// Internal kernel entry points for the dispatcher. Not installed.

#include <cstddef>

namespace qcert::kernels::detail {

double scalar_dot(const double* x, const double* y, std::size_t n);
void scalar_axpy(double a, const double* x, double* y, std::size_t n);
void scalar_scale(double a, double* x, std::size_t n);
void scalar_gemm_acc(const double* a, const double* b, double* c,
                     std::size_t m, std::size_t k, std::size_t n);

bool avx2_available();
double avx2_dot(const double* x, const double* y, std::size_t n);
void avx2_axpy(double a, const double* x, double* y, std::size_t n);
void avx2_scale(double a, double* x, std::size_t n);
void avx2_gemm_acc(const double* a, const double* b, double* c,
                   std::size_t m, std::size_t k, std::size_t n);

}  // namespace qcert::kernels::detail
