// Runtime ISA selection for the dense kernels.

#include "qcert/kernels.hpp"

#include <cstring>

#include "kernels_impl.hpp"

namespace qcert::kernels {
namespace {

struct Table {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scale)(double, double*, std::size_t);
  void (*gemm_acc)(const double*, const double*, double*,
                   std::size_t, std::size_t, std::size_t);
  const char* name;
};

constexpr Table kScalar{detail::scalar_dot, detail::scalar_axpy,
                        detail::scalar_scale, detail::scalar_gemm_acc,
                        "scalar"};
constexpr Table kAvx2{detail::avx2_dot, detail::avx2_axpy,
                      detail::avx2_scale, detail::avx2_gemm_acc, "avx2"};

const Table* auto_table() {
  return detail::avx2_available() ? &kAvx2 : &kScalar;
}

const Table*& current() {
  static const Table* t = auto_table();
  return t;
}

}  // namespace

double dot(const double* x, const double* y, std::size_t n) {
  return current()->dot(x, y, n);
}
void axpy(double a, const double* x, double* y, std::size_t n) {
  current()->axpy(a, x, y, n);
}
void scale(double a, double* x, std::size_t n) {
  current()->scale(a, x, n);
}
void gemm_acc(const double* a, const double* b, double* c,
              std::size_t m, std::size_t k, std::size_t n) {
  current()->gemm_acc(a, b, c, m, k, n);
}

const char* active_isa() { return current()->name; }

bool select_isa(const char* name) {
  if (std::strcmp(name, "scalar") == 0) {
    current() = &kScalar;
    return true;
  }
  if (std::strcmp(name, "avx2") == 0) {
    if (!detail::avx2_available()) return false;
    current() = &kAvx2;
    return true;
  }
  if (std::strcmp(name, "auto") == 0) {
    current() = auto_table();
    return true;
  }
  return false;
}

}  // namespace qcert::kernels
