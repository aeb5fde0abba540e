// Kernel dispatch tests: the scalar and AVX2 implementations must agree on
// every shape, including sizes that exercise vector remainders.

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "doctest.h"
#include "qcert/kernels.hpp"
#include "qcert/rng.hpp"

using namespace qcert;

namespace {

std::vector<double> random_vec(rng::Xoshiro256pp& g, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = 2.0 * g.uniform() - 1.0;
  return v;
}

// Runs fn under each available implementation and checks the outputs agree.
template <typename Fn>
void for_each_isa(Fn fn) {
  std::string original = kernels::active_isa();
  REQUIRE(kernels::select_isa("scalar"));
  auto scalar = fn();
  bool have_avx2 = kernels::select_isa("avx2");
  if (have_avx2) {
    auto vectored = fn();
    REQUIRE(scalar.size() == vectored.size());
    for (std::size_t i = 0; i < scalar.size(); ++i)
      CHECK(scalar[i] == doctest::Approx(vectored[i]).epsilon(1e-12));
  }
  kernels::select_isa("auto");
  CHECK(std::string(kernels::active_isa()) == original);
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("isa selection reports and restores") {
  std::string original = kernels::active_isa();
  CHECK((original == "avx2" || original == "scalar"));
  REQUIRE(kernels::select_isa("scalar"));
  CHECK(std::string(kernels::active_isa()) == "scalar");
  CHECK_FALSE(kernels::select_isa("sse9"));
  CHECK(std::string(kernels::active_isa()) == "scalar");
  kernels::select_isa("auto");
  CHECK(std::string(kernels::active_isa()) == original);
}

TEST_CASE("dot agrees across implementations and sizes") {
  rng::Xoshiro256pp g(12345);
  for (std::size_t n : {0, 1, 2, 3, 4, 5, 7, 8, 15, 16, 17, 63, 64, 65, 200}) {
    auto x = random_vec(g, n);
    auto y = random_vec(g, n);
    for_each_isa([&] {
      return std::vector<double>{kernels::dot(x.data(), y.data(), n)};
    });
  }
}

TEST_CASE("dot matches extended-precision reference") {
  rng::Xoshiro256pp g(99);
  std::size_t n = 301;
  auto x = random_vec(g, n);
  auto y = random_vec(g, n);
  long double ref = 0.0L;
  for (std::size_t i = 0; i < n; ++i)
    ref += static_cast<long double>(x[i]) * y[i];
  CHECK(kernels::dot(x.data(), y.data(), n) ==
        doctest::Approx(static_cast<double>(ref)).epsilon(1e-13));
}

TEST_CASE("axpy and scale agree across implementations") {
  rng::Xoshiro256pp g(777);
  for (std::size_t n : {1, 3, 4, 9, 31, 32, 33, 100}) {
    auto x = random_vec(g, n);
    auto y0 = random_vec(g, n);
    for_each_isa([&] {
      auto y = y0;
      kernels::axpy(0.37, x.data(), y.data(), n);
      kernels::scale(-1.25, y.data(), n);
      return y;
    });
  }
}

TEST_CASE("gemm_acc accumulates into C") {
  rng::Xoshiro256pp g(5);
  std::size_t m = 7, k = 5, n = 9;
  auto a = random_vec(g, m * k);
  auto b = random_vec(g, k * n);
  std::vector<double> c(m * n, 0.0);
  kernels::gemm_acc(a.data(), b.data(), c.data(), m, k, n);
  auto once = c;
  kernels::gemm_acc(a.data(), b.data(), c.data(), m, k, n);
  for (std::size_t i = 0; i < c.size(); ++i)
    CHECK(c[i] == doctest::Approx(2.0 * once[i]).epsilon(1e-12));
}

TEST_CASE("gemm_acc agrees across implementations and odd shapes") {
  rng::Xoshiro256pp g(31);
  for (auto [m, k, n] : {std::array<std::size_t, 3>{1, 1, 1},
                         {2, 3, 4},
                         {5, 8, 3},
                         {16, 16, 16},
                         {17, 19, 23},
                         {37, 4, 37}}) {
    auto a = random_vec(g, m * k);
    auto b = random_vec(g, k * n);
    for_each_isa([&, m = m, k = k, n = n] {
      std::vector<double> c(m * n, 0.5);
      kernels::gemm_acc(a.data(), b.data(), c.data(), m, k, n);
      return c;
    });
  }
}

TEST_CASE("gemm_acc matches triple-loop reference") {
  rng::Xoshiro256pp g(8);
  std::size_t m = 6, k = 11, n = 4;
  auto a = random_vec(g, m * k);
  auto b = random_vec(g, k * n);
  std::vector<double> c(m * n, 0.0), ref(m * n, 0.0);
  kernels::gemm_acc(a.data(), b.data(), c.data(), m, k, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t j = 0; j < n; ++j)
        ref[i * n + j] += a[i * k + p] * b[p * n + j];
  for (std::size_t i = 0; i < c.size(); ++i)
    CHECK(c[i] == doctest::Approx(ref[i]).epsilon(1e-12));
}

}  // TEST_SUITE
