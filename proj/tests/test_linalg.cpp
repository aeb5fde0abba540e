// Dense linear algebra tests: Cholesky, symmetric eigensolver, simplex
// projection, and the complex helpers used by the quantum model.

#include <cmath>
#include <vector>

#include "doctest.h"
#include "qcert/linalg.hpp"
#include "qcert/rng.hpp"

using namespace qcert;
using linalg::CMat;
using linalg::Mat;

namespace {

Mat random_spd(rng::Xoshiro256pp& g, int n, double ridge = 0.5) {
  Mat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = 2.0 * g.uniform() - 1.0;
  Mat a = linalg::matmul(linalg::transpose(m), m);
  for (int i = 0; i < n; ++i) a(i, i) += ridge;
  return a;
}

CMat random_hermitian(rng::Xoshiro256pp& g, int n) {
  CMat h(n, n);
  for (int i = 0; i < n; ++i) {
    h(i, i) = 2.0 * g.uniform() - 1.0;
    for (int j = i + 1; j < n; ++j) {
      linalg::cplx z(2.0 * g.uniform() - 1.0, 2.0 * g.uniform() - 1.0);
      h(i, j) = z;
      h(j, i) = std::conj(z);
    }
  }
  return h;
}

}  // namespace

TEST_SUITE("linalg") {

TEST_CASE("cholesky factors and solves SPD systems") {
  rng::Xoshiro256pp g(42);
  for (int n : {1, 2, 5, 12, 37}) {
    Mat a = random_spd(g, n);
    Mat l;
    REQUIRE(linalg::cholesky(a, l));
    Mat rec = linalg::matmul(l, linalg::transpose(l));
    CHECK(linalg::max_abs([&] {
            Mat d = rec;
            for (int i = 0; i < n; ++i)
              for (int j = 0; j < n; ++j) d(i, j) -= a(i, j);
            return d;
          }()) < 1e-10);

    std::vector<double> b(n), x(n);
    for (auto& v : b) v = 2.0 * g.uniform() - 1.0;
    x = b;
    linalg::chol_solve(l, x.data());
    for (int i = 0; i < n; ++i) {
      double r = -b[i];
      for (int j = 0; j < n; ++j) r += a(i, j) * x[j];
      CHECK(std::abs(r) < 1e-9);
    }
  }
}

TEST_CASE("cholesky rejects indefinite matrices") {
  Mat a(2, 2);
  a(0, 0) = 1.0;
  a(0, 1) = a(1, 0) = 3.0;
  a(1, 1) = 1.0;  // eigenvalues 4 and -2
  Mat l;
  CHECK_FALSE(linalg::cholesky(a, l));
}

TEST_CASE("chol_inverse inverts") {
  rng::Xoshiro256pp g(7);
  int n = 9;
  Mat a = random_spd(g, n);
  Mat l;
  REQUIRE(linalg::cholesky(a, l));
  Mat inv = linalg::chol_inverse(l);
  Mat prod = linalg::matmul(a, inv);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      CHECK(prod(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-9));
}

TEST_CASE("sym_eig reconstructs and orders") {
  rng::Xoshiro256pp g(3);
  int n = 16;
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) a(i, j) = a(j, i) = 2.0 * g.uniform() - 1.0;

  std::vector<double> w;
  Mat v;
  linalg::sym_eig(a, w, v);
  REQUIRE(static_cast<int>(w.size()) == n);
  for (int i = 1; i < n; ++i) CHECK(w[i - 1] <= w[i] + 1e-12);
  CHECK(linalg::sym_min_eig(a) == doctest::Approx(w[0]).epsilon(1e-10));

  // A V = V diag(w)
  Mat av = linalg::matmul(a, v);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      CHECK(av(i, j) == doctest::Approx(v(i, j) * w[j]).epsilon(5e-8).scale(1.0));

  // Orthonormal columns.
  Mat vtv = linalg::matmul(linalg::transpose(v), v);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      CHECK(vtv(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-9));
}

TEST_CASE("simplex projection basics") {
  auto p = linalg::simplex_project({0.5, 0.3, 0.2}, 1.0);
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(p[1] == doctest::Approx(0.3));
  CHECK(p[2] == doctest::Approx(0.2));

  p = linalg::simplex_project({1.2, -0.1, 0.05}, 1.0);
  double sum = 0.0;
  for (double v : p) {
    CHECK(v >= 0.0);
    sum += v;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

  // Projection is idempotent.
  auto q = linalg::simplex_project(p, 1.0);
  for (std::size_t i = 0; i < p.size(); ++i)
    CHECK(q[i] == doctest::Approx(p[i]).epsilon(1e-12));
}

TEST_CASE("complex product and kron identities") {
  rng::Xoshiro256pp g(11);
  CMat a = random_hermitian(g, 2), b = random_hermitian(g, 2);
  CMat c = random_hermitian(g, 2), d = random_hermitian(g, 2);
  // (A kron B)(C kron D) = AC kron BD
  CMat lhs = linalg::cmatmul(linalg::kron(a, b), linalg::kron(c, d));
  CMat rhs = linalg::kron(linalg::cmatmul(a, c), linalg::cmatmul(b, d));
  CHECK(linalg::frobenius_distance(lhs, rhs) < 1e-12);

  CHECK(linalg::herm_deviation(a) < 1e-15);
  CHECK(std::abs(linalg::trace(linalg::kron(a, b)).real() -
                 (linalg::trace(a) * linalg::trace(b)).real()) < 1e-12);

  // adjoint(AB) = adjoint(B) adjoint(A)
  CMat ab = linalg::cmatmul(a, b);
  CHECK(linalg::frobenius_distance(
            linalg::adjoint(ab),
            linalg::cmatmul(linalg::adjoint(b), linalg::adjoint(a))) < 1e-12);
}

TEST_CASE("hermitian eigenvalues through the real embedding") {
  rng::Xoshiro256pp g(23);
  CMat h = random_hermitian(g, 4);
  auto w = linalg::herm_eigvals(h);
  REQUIRE(w.size() == 4);
  CHECK(linalg::herm_min_eig(h) == doctest::Approx(w[0]).epsilon(1e-10));
  double tr = 0.0;
  for (double v : w) tr += v;
  CHECK(tr == doctest::Approx(linalg::trace(h).real()).epsilon(1e-10));
}

TEST_CASE("herm_project_simplex returns a PSD trace-one matrix") {
  rng::Xoshiro256pp g(29);
  CMat h = random_hermitian(g, 4);
  CMat rho = linalg::herm_project_simplex(h, 1.0);
  CHECK(linalg::herm_min_eig(rho) >= -1e-12);
  CHECK(linalg::trace(rho).real() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(linalg::trace(rho).imag()) < 1e-12);
  // Idempotent on its own output.
  CMat again = linalg::herm_project_simplex(rho, 1.0);
  CHECK(linalg::frobenius_distance(rho, again) < 1e-10);
}

}  // TEST_SUITE
