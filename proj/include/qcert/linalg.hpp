#pragma once
// Small dense linear algebra on top of the kernels module: row-major
// matrices, Cholesky factorization/inversion, a symmetric eigensolver
// (Householder tridiagonalization + implicit QL, EISPACK lineage), and
// complex Hermitian helpers for the quantum-state side.
//
// Hermitian eigenvalue problems are handled through the real embedding
// H = X + iY  ->  [[X, -Y], [Y, X]], which is symmetric, has every
// eigenvalue of H twice, and commutes with spectral functions — so
// eigenvalue clipping and simplex projection can be done in the embedded
// space without a complex eigensolver.

#include <complex>
#include <cstddef>
#include <vector>

namespace qcert::linalg {

struct Mat {
  int rows = 0, cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }
  double* row(int i) { return a.data() + static_cast<std::size_t>(i) * cols; }
  const double* row(int i) const { return a.data() + static_cast<std::size_t>(i) * cols; }

  static Mat identity(int n);
};

Mat matmul(const Mat& A, const Mat& B);
Mat transpose(const Mat& A);
double max_abs(const Mat& A);

// A = L L^T with L lower triangular. Returns false if a pivot is not
// strictly positive (A not positive definite). L may alias nothing.
bool cholesky(const Mat& A, Mat& L);

// In-place triangular solves against a Cholesky factor.
void solve_lower(const Mat& L, double* b);    // L b' = b
void solve_lower_t(const Mat& L, double* b);  // L^T b' = b
void chol_solve(const Mat& L, double* b);     // (L L^T) b' = b

// Symmetric inverse (L L^T)^{-1}, computed as (L^{-T})(L^{-T})^T.
Mat chol_inverse(const Mat& L);

// Eigendecomposition of a symmetric matrix: A = V diag(w) V^T, with w
// ascending and eigenvectors in the columns of V. Throws on (extremely
// unlikely) QL non-convergence.
void sym_eig(const Mat& A, std::vector<double>& w, Mat& V);
double sym_min_eig(const Mat& A);

// Euclidean projection of lam onto { v : v >= 0, sum v = total }.
std::vector<double> simplex_project(const std::vector<double>& lam, double total);

using cplx = std::complex<double>;

struct CMat {
  int rows = 0, cols = 0;
  std::vector<cplx> a;

  CMat() = default;
  CMat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c) {}

  cplx& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  cplx operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

  static CMat identity(int n);
};

CMat cmatmul(const CMat& A, const CMat& B);
CMat adjoint(const CMat& A);
CMat kron(const CMat& A, const CMat& B);
CMat cadd(const CMat& A, const CMat& B);
CMat cscale(cplx s, const CMat& A);
cplx trace(const CMat& A);
double herm_deviation(const CMat& A);          // max |A - A^dagger| entry
double frobenius_distance(const CMat& A, const CMat& B);

// Eigenvalues of a Hermitian matrix, ascending (n values, deduplicated
// from the 2n-dimensional real embedding by pair-averaging).
std::vector<double> herm_eigvals(const CMat& H);
double herm_min_eig(const CMat& H);

// Nearest (Frobenius) matrix to H among Hermitian PSD matrices with fixed
// trace `total`: eigenvalue simplex projection, done in the real embedding.
CMat herm_project_simplex(const CMat& H, double total);

}  // namespace qcert::linalg
