#include "qcert/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "qcert/kernels.hpp"

namespace qcert::linalg {

Mat Mat::identity(int n) {
  Mat I(n, n);
  for (int i = 0; i < n; ++i) I(i, i) = 1.0;
  return I;
}

Mat matmul(const Mat& A, const Mat& B) {
  if (A.cols != B.rows) throw std::invalid_argument("matmul: shape mismatch");
  Mat C(A.rows, B.cols);
  kernels::gemm_acc(A.a.data(), B.a.data(), C.a.data(), A.rows, A.cols, B.cols);
  return C;
}

Mat transpose(const Mat& A) {
  Mat T(A.cols, A.rows);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) T(j, i) = A(i, j);
  return T;
}

double max_abs(const Mat& A) {
  double m = 0.0;
  for (double v : A.a) m = std::max(m, std::fabs(v));
  return m;
}

bool cholesky(const Mat& A, Mat& L) {
  const int n = A.rows;
  L = Mat(n, n);
  for (int j = 0; j < n; ++j) {
    const double djj = A(j, j) - kernels::dot(L.row(j), L.row(j), j);
    if (!(djj > 0.0)) return false;  // also catches NaN
    const double ljj = std::sqrt(djj);
    L(j, j) = ljj;
    for (int i = j + 1; i < n; ++i)
      L(i, j) = (A(i, j) - kernels::dot(L.row(i), L.row(j), j)) / ljj;
  }
  return true;
}

void solve_lower(const Mat& L, double* b) {
  const int n = L.rows;
  for (int i = 0; i < n; ++i)
    b[i] = (b[i] - kernels::dot(L.row(i), b, i)) / L(i, i);
}

void solve_lower_t(const Mat& L, double* b) {
  const int n = L.rows;
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int k = i + 1; k < n; ++k) s -= L(k, i) * b[k];
    b[i] = s / L(i, i);
  }
}

void chol_solve(const Mat& L, double* b) {
  solve_lower(L, b);
  solve_lower_t(L, b);
}

Mat chol_inverse(const Mat& L) {
  const int n = L.rows;
  // X = L^{-T} stored row-major (upper triangular): row i of X is the i-th
  // column of L^{-1}, obtained by forward substitution on the unit vector.
  Mat X(n, n);
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) {
    std::fill(w.begin(), w.end(), 0.0);
    w[i] = 1.0;
    for (int k = i; k < n; ++k)
      w[k] = (w[k] - kernels::dot(L.row(k) + i, w.data() + i, k - i)) / L(k, k);
    for (int k = i; k < n; ++k) X(i, k) = w[k];
  }
  // A^{-1} = X X^T; entry (i,j) only needs the overlap k >= max(i,j).
  Mat Inv(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const int m = j;  // = max(i,j)
      const double v = kernels::dot(X.row(i) + m, X.row(j) + m, n - m);
      Inv(i, j) = v;
      Inv(j, i) = v;
    }
  return Inv;
}

namespace {

// Householder tridiagonalization with accumulated transformations, after
// the Algol tred2 procedure (Bowdler, Martin, Reinsch, Wilkinson) via its
// EISPACK/JAMA descendants.
void tred2(Mat& V, std::vector<double>& d, std::vector<double>& e) {
  const int n = V.rows;
  for (int j = 0; j < n; ++j) d[j] = V(n - 1, j);

  for (int i = n - 1; i > 0; --i) {
    double scale = 0.0, h = 0.0;
    for (int k = 0; k < i; ++k) scale += std::fabs(d[k]);
    if (scale == 0.0) {
      e[i] = d[i - 1];
      for (int j = 0; j < i; ++j) {
        d[j] = V(i - 1, j);
        V(i, j) = 0.0;
        V(j, i) = 0.0;
      }
    } else {
      for (int k = 0; k < i; ++k) {
        d[k] /= scale;
        h += d[k] * d[k];
      }
      double f = d[i - 1];
      double g = std::sqrt(h);
      if (f > 0) g = -g;
      e[i] = scale * g;
      h -= f * g;
      d[i - 1] = f - g;
      for (int j = 0; j < i; ++j) e[j] = 0.0;

      for (int j = 0; j < i; ++j) {
        f = d[j];
        V(j, i) = f;
        g = e[j] + V(j, j) * f;
        for (int k = j + 1; k <= i - 1; ++k) {
          g += V(k, j) * d[k];
          e[k] += V(k, j) * f;
        }
        e[j] = g;
      }
      f = 0.0;
      for (int j = 0; j < i; ++j) {
        e[j] /= h;
        f += e[j] * d[j];
      }
      const double hh = f / (h + h);
      for (int j = 0; j < i; ++j) e[j] -= hh * d[j];
      for (int j = 0; j < i; ++j) {
        f = d[j];
        g = e[j];
        for (int k = j; k <= i - 1; ++k) V(k, j) -= (f * e[k] + g * d[k]);
        d[j] = V(i - 1, j);
        V(i, j) = 0.0;
      }
    }
    d[i] = h;
  }

  for (int i = 0; i < n - 1; ++i) {
    V(n - 1, i) = V(i, i);
    V(i, i) = 1.0;
    const double h = d[i + 1];
    if (h != 0.0) {
      for (int k = 0; k <= i; ++k) d[k] = V(k, i + 1) / h;
      for (int j = 0; j <= i; ++j) {
        double g = 0.0;
        for (int k = 0; k <= i; ++k) g += V(k, i + 1) * V(k, j);
        for (int k = 0; k <= i; ++k) V(k, j) -= g * d[k];
      }
    }
    for (int k = 0; k <= i; ++k) V(k, i + 1) = 0.0;
  }
  for (int j = 0; j < n; ++j) {
    d[j] = V(n - 1, j);
    V(n - 1, j) = 0.0;
  }
  V(n - 1, n - 1) = 1.0;
  e[0] = 0.0;
}

// Implicit-shift QL iteration on the tridiagonal form (Algol tql2 lineage),
// eigenvalues sorted ascending with matching eigenvector columns.
void tql2(Mat& V, std::vector<double>& d, std::vector<double>& e) {
  const int n = V.rows;
  for (int i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;

  double f = 0.0, tst1 = 0.0;
  const double eps = std::ldexp(1.0, -52);
  for (int l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::fabs(d[l]) + std::fabs(e[l]));
    int m = l;
    while (m < n) {
      if (std::fabs(e[m]) <= eps * tst1) break;
      ++m;
    }
    if (m > l) {
      int iter = 0;
      do {
        if (++iter > 100) throw std::runtime_error("sym_eig: QL iteration failed to converge");
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (int i = l + 2; i < n; ++i) d[i] -= h;
        f += h;

        p = d[m];
        double c = 1.0, c2 = c, c3 = c;
        const double el1 = e[l + 1];
        double s = 0.0, s2 = 0.0;
        for (int i = m - 1; i >= l; --i) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[i];
          h = c * p;
          r = std::hypot(p, e[i]);
          e[i + 1] = s * r;
          s = e[i] / r;
          c = p / r;
          p = c * d[i] - s * g;
          d[i + 1] = h + s * (c * g + s * d[i]);
          for (int k = 0; k < n; ++k) {
            h = V(k, i + 1);
            V(k, i + 1) = s * V(k, i) + c * h;
            V(k, i) = c * V(k, i) - s * h;
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::fabs(e[l]) > eps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }

  for (int i = 0; i < n - 1; ++i) {
    int k = i;
    double p = d[i];
    for (int j = i + 1; j < n; ++j)
      if (d[j] < p) {
        k = j;
        p = d[j];
      }
    if (k != i) {
      d[k] = d[i];
      d[i] = p;
      for (int j = 0; j < n; ++j) std::swap(V(j, i), V(j, k));
    }
  }
}

}  // namespace

void sym_eig(const Mat& A, std::vector<double>& w, Mat& V) {
  if (A.rows != A.cols) throw std::invalid_argument("sym_eig: not square");
  const int n = A.rows;
  V = A;
  w.assign(n, 0.0);
  std::vector<double> e(n, 0.0);
  if (n == 1) {
    w[0] = A(0, 0);
    V(0, 0) = 1.0;
    return;
  }
  tred2(V, w, e);
  tql2(V, w, e);
}

double sym_min_eig(const Mat& A) {
  std::vector<double> w;
  Mat V;
  sym_eig(A, w, V);
  return w.front();
}

std::vector<double> simplex_project(const std::vector<double>& lam, double total) {
  const std::size_t n = lam.size();
  std::vector<double> u(lam);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0, tau = 0.0;
  bool found = false;
  for (std::size_t i = 0; i < n; ++i) {
    css += u[i];
    const double t = (css - total) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) {
      tau = t;
      found = true;
    }
  }
  if (!found) tau = (css - total) / static_cast<double>(n);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::max(lam[i] - tau, 0.0);
  return out;
}

CMat CMat::identity(int n) {
  CMat I(n, n);
  for (int i = 0; i < n; ++i) I(i, i) = 1.0;
  return I;
}

CMat cmatmul(const CMat& A, const CMat& B) {
  if (A.cols != B.rows) throw std::invalid_argument("cmatmul: shape mismatch");
  CMat C(A.rows, B.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int k = 0; k < A.cols; ++k) {
      const cplx aik = A(i, k);
      if (aik == cplx{}) continue;
      for (int j = 0; j < B.cols; ++j) C(i, j) += aik * B(k, j);
    }
  return C;
}

CMat adjoint(const CMat& A) {
  CMat T(A.cols, A.rows);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) T(j, i) = std::conj(A(i, j));
  return T;
}

CMat kron(const CMat& A, const CMat& B) {
  CMat K(A.rows * B.rows, A.cols * B.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j)
      for (int k = 0; k < B.rows; ++k)
        for (int l = 0; l < B.cols; ++l)
          K(i * B.rows + k, j * B.cols + l) = A(i, j) * B(k, l);
  return K;
}

CMat cadd(const CMat& A, const CMat& B) {
  CMat C = A;
  for (std::size_t i = 0; i < C.a.size(); ++i) C.a[i] += B.a[i];
  return C;
}

CMat cscale(cplx s, const CMat& A) {
  CMat C = A;
  for (auto& v : C.a) v *= s;
  return C;
}

cplx trace(const CMat& A) {
  cplx t = 0.0;
  for (int i = 0; i < A.rows; ++i) t += A(i, i);
  return t;
}

double herm_deviation(const CMat& A) {
  double m = 0.0;
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j)
      m = std::max(m, std::abs(A(i, j) - std::conj(A(j, i))));
  return m;
}

double frobenius_distance(const CMat& A, const CMat& B) {
  double s = 0.0;
  for (std::size_t i = 0; i < A.a.size(); ++i) s += std::norm(A.a[i] - B.a[i]);
  return std::sqrt(s);
}

namespace {

Mat embed(const CMat& H) {
  const int n = H.rows;
  Mat E(2 * n, 2 * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double x = H(i, j).real(), y = H(i, j).imag();
      E(i, j) = x;
      E(n + i, n + j) = x;
      E(i, n + j) = -y;
      E(n + i, j) = y;
    }
  return E;
}

CMat unembed(const Mat& E, int n) {
  CMat H(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      // average the two copies for symmetry robustness
      const double x = 0.5 * (E(i, j) + E(n + i, n + j));
      const double y = 0.5 * (E(n + i, j) - E(i, n + j));
      H(i, j) = {x, y};
    }
  return H;
}

}  // namespace

std::vector<double> herm_eigvals(const CMat& H) {
  const int n = H.rows;
  std::vector<double> w;
  Mat V;
  sym_eig(embed(H), w, V);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = 0.5 * (w[2 * i] + w[2 * i + 1]);
  return out;
}

double herm_min_eig(const CMat& H) { return herm_eigvals(H).front(); }

CMat herm_project_simplex(const CMat& H, double total) {
  const int n = H.rows;
  std::vector<double> w;
  Mat V;
  sym_eig(embed(H), w, V);
  // every eigenvalue of H appears twice in the embedding, so project onto
  // the doubled simplex; by symmetry this equals the doubled projection
  const std::vector<double> wp = simplex_project(w, 2.0 * total);
  Mat E(2 * n, 2 * n);
  for (int c = 0; c < 2 * n; ++c) {
    if (wp[c] == 0.0) continue;
    for (int i = 0; i < 2 * n; ++i) {
      const double vi = V(i, c) * wp[c];
      if (vi == 0.0) continue;
      for (int j = 0; j < 2 * n; ++j) E(i, j) += vi * V(j, c);
    }
  }
  CMat P = unembed(E, n);
  // exact hermitization against rounding
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const cplx v = 0.5 * (P(i, j) + std::conj(P(j, i)));
      P(i, j) = v;
      P(j, i) = std::conj(v);
    }
  return P;
}

}  // namespace qcert::linalg
