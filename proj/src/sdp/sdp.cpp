// Infeasible-start primal-dual interior-point solver (HKM direction with
// Mehrotra predictor-corrector) for block-LMI semidefinite programs, plus
// rigorous certification of lower bounds from approximate duals.

#include "qcert/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "qcert/errors.hpp"
#include "qcert/kernels.hpp"

namespace qcert::sdp {

using linalg::Mat;

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::primal_infeasible: return "primal_infeasible";
    case SolveStatus::dual_infeasible: return "dual_infeasible";
    case SolveStatus::max_iterations: return "max_iterations";
    case SolveStatus::stalled: return "stalled";
  }
  return "unknown";
}

void SdpProblem::validate() const {
  if (nvars < 0) throw ValidationError("nvars must be >= 0");
  if (static_cast<int>(c.size()) != nvars)
    throw ValidationError("objective length does not match nvars");
  if (!var_bound.empty() && static_cast<int>(var_bound.size()) != nvars)
    throw ValidationError("var_bound length does not match nvars");
  if (blocks.empty()) throw ValidationError("problem has no blocks");
  for (const auto& b : blocks) {
    if (b.dim <= 0 || b.C.rows != b.dim || b.C.cols != b.dim)
      throw ValidationError("block constant has wrong shape");
    for (int i = 0; i < b.dim; ++i)
      for (int j = i + 1; j < b.dim; ++j)
        if (std::abs(b.C(i, j) - b.C(j, i)) > 1e-12)
          throw ValidationError("block constant is not symmetric");
    if (static_cast<int>(b.A.size()) != nvars)
      throw ValidationError("block coefficient list does not match nvars");
    for (const auto& list : b.A)
      for (const auto& t : list) {
        if (t.row < 0 || t.col < t.row || t.col >= b.dim)
          throw ValidationError("triplet outside the upper triangle");
        if (!std::isfinite(t.value))
          throw ValidationError("triplet value is not finite");
      }
  }
  if (E.rows > 0 && E.cols != nvars)
    throw ValidationError("equality matrix width does not match nvars");
  if (static_cast<int>(g.size()) != E.rows)
    throw ValidationError("equality rhs length does not match rows");
}

namespace {

// out += w * A_i as a dense symmetric matrix
void add_coeff(const std::vector<Triplet>& a, double w, Mat& out) {
  for (const auto& t : a) {
    out(t.row, t.col) += w * t.value;
    if (t.row != t.col) out(t.col, t.row) += w * t.value;
  }
}

// tr(A_i T) for a general (not necessarily symmetric) square T
double inner_general(const std::vector<Triplet>& a, const Mat& T) {
  double acc = 0.0;
  for (const auto& t : a) {
    acc += t.value * T(t.col, t.row);
    if (t.row != t.col) acc += t.value * T(t.row, t.col);
  }
  return acc;
}

// V += A_i * Y for symmetric Y (row operations on Y)
void sparse_mul_sym(const std::vector<Triplet>& a, const Mat& Y, Mat& V) {
  const std::size_t nc = static_cast<std::size_t>(Y.cols);
  for (const auto& t : a) {
    kernels::axpy(t.value, Y.row(t.col), V.row(t.row), nc);
    if (t.row != t.col) kernels::axpy(t.value, Y.row(t.row), V.row(t.col), nc);
  }
}

double frob_inner(const Mat& X, const Mat& Y) {
  return kernels::dot(X.a.data(), Y.a.data(), X.a.size());
}

void zero(Mat& X) { std::fill(X.a.begin(), X.a.end(), 0.0); }

// C = A * B
void gemm_into(const Mat& A, const Mat& B, Mat& C) {
  zero(C);
  kernels::gemm_acc(A.a.data(), B.a.data(), C.a.data(),
                    static_cast<std::size_t>(A.rows),
                    static_cast<std::size_t>(A.cols),
                    static_cast<std::size_t>(B.cols));
}

void symmetrize(Mat& X) {
  for (int i = 0; i < X.rows; ++i)
    for (int j = i + 1; j < X.cols; ++j) {
      double v = 0.5 * (X(i, j) + X(j, i));
      X(i, j) = v;
      X(j, i) = v;
    }
}

// Cholesky with a deterministic escalating ridge; throws on breakdown.
void chol_or_ridge(const Mat& A, Mat& L, const char* what) {
  if (linalg::cholesky(A, L)) return;
  double scale = 1.0;
  for (int i = 0; i < A.rows; ++i) scale = std::max(scale, std::abs(A(i, i)));
  Mat bumped = A;
  for (double bump : {1e-14, 1e-12, 1e-10, 1e-8}) {
    for (int i = 0; i < A.rows; ++i) bumped(i, i) = A(i, i) + bump * scale;
    if (linalg::cholesky(bumped, L)) return;
  }
  throw SolverError(std::string("Cholesky breakdown in ") + what);
}

// min eig of L^{-1} D L^{-T} (D symmetric, L lower Cholesky factor)
double min_eig_whitened(const Mat& L, const Mat& D, Mat& scratchB,
                        Mat& scratchW, std::vector<double>& col) {
  const int n = D.rows;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) col[i] = D(i, j);
    linalg::solve_lower(L, col.data());
    for (int i = 0; i < n; ++i) scratchB(i, j) = col[i];
  }
  for (int j = 0; j < n; ++j) {
    const double* row = scratchB.row(j);
    std::copy(row, row + n, col.begin());
    linalg::solve_lower(L, col.data());
    for (int i = 0; i < n; ++i) scratchW(j, i) = col[i];
  }
  symmetrize(scratchW);
  return linalg::sym_min_eig(scratchW);
}

struct BlockState {
  const Block* blk = nullptr;
  std::vector<int> vars;  // variables with entries in this block, ascending
  Mat S, Y, Ls, Ly, Sinv, Rp, G, dS, dY, dSa, dYa;
  Mat w1, w2, w3;  // scratch
  std::vector<double> col;
};

}  // namespace

SdpSolution solve(const SdpProblem& p, const SolveOptions& opt) {
  p.validate();
  const int n = p.nvars;
  const int m = p.num_eq();
  const int nb = static_cast<int>(p.blocks.size());

  SdpSolution sol;
  sol.x.assign(n, 0.0);
  sol.eq_mult.assign(m, 0.0);

  if (n == 0) {
    // Nothing to optimize: the problem is feasible iff every constant
    // block is PSD.
    bool feasible = true;
    for (const auto& b : p.blocks)
      feasible = feasible && linalg::sym_min_eig(b.C) >= -1e-10;
    for (const auto& b : p.blocks) sol.Y.emplace_back(b.dim, b.dim);
    sol.status =
        feasible ? SolveStatus::optimal : SolveStatus::primal_infeasible;
    sol.objective = sol.dual_objective = p.objective_offset;
    return sol;
  }

  int N = 0;
  for (const auto& b : p.blocks) N += b.dim;

  double normC = 0.0, normA = 0.0, normc = 0.0, normg = 0.0;
  for (const auto& b : p.blocks) {
    normC = std::max(normC, linalg::max_abs(b.C));
    for (const auto& list : b.A)
      for (const auto& t : list) normA = std::max(normA, std::abs(t.value));
  }
  for (double v : p.c) normc = std::max(normc, std::abs(v));
  for (double v : p.g) normg = std::max(normg, std::abs(v));

  std::vector<BlockState> bs(nb);
  for (int k = 0; k < nb; ++k) {
    BlockState& b = bs[k];
    b.blk = &p.blocks[k];
    const int d = b.blk->dim;
    for (int i = 0; i < n; ++i)
      if (!b.blk->A[i].empty()) b.vars.push_back(i);
    for (Mat* mat : {&b.S, &b.Y, &b.Ls, &b.Ly, &b.Sinv, &b.Rp, &b.G, &b.dS,
                     &b.dY, &b.dSa, &b.dYa, &b.w1, &b.w2, &b.w3})
      *mat = Mat(d, d);
    b.col.assign(d, 0.0);
  }

  const double xi = std::max({10.0, 2.0 * normC, 2.0 * normA});
  const double eta = std::max(10.0, 2.0 * normc);
  for (auto& b : bs)
    for (int i = 0; i < b.blk->dim; ++i) {
      b.S(i, i) = xi;
      b.Y(i, i) = eta;
    }

  std::vector<double> x(n, 0.0), nu(m, 0.0);
  std::vector<double> rd(n), h(n), r_e(m), dx(n), dxa(n), dnu(m), dnua(m);
  Mat M(n, n), Lm;
  Mat MinvEt(n, m), schur(m, m), Lschur;
  std::vector<double> minv_h(n), rhs2(m);

  int stall = 0;
  int iter = 0;

  // Best iterate seen so far (by worst tolerance ratio).  Late iterations
  // can corrupt the dual on degenerate problems once mu is driven far
  // below what the normal equations support, so every non-ray exit
  // returns this snapshot instead of the final iterate.
  struct Snapshot {
    bool valid = false;
    double merit = std::numeric_limits<double>::infinity();
    std::vector<double> x, nu;
    std::vector<Mat> Y;
    double pobj = 0.0, dobj = 0.0, rel_gap = 0.0, pinf = 0.0, dinf = 0.0;
  } best;
  int no_improve = 0;

  auto assemble_direction = [&](double sigmu, bool corrector,
                                std::vector<double>& dx_out,
                                std::vector<double>& dnu_out) {
    // G_k = sigmu*Sinv - Y - Sinv*(Rp*Y + K), K = dSa*dYa on the corrector
    for (auto& b : bs) {
      gemm_into(b.Rp, b.Y, b.w1);
      if (corrector)
        kernels::gemm_acc(b.dSa.a.data(), b.dYa.a.data(), b.w1.a.data(),
                          b.dSa.rows, b.dSa.cols, b.dYa.cols);
      gemm_into(b.Sinv, b.w1, b.G);
      for (std::size_t t = 0; t < b.G.a.size(); ++t)
        b.G.a[t] = sigmu * b.Sinv.a[t] - b.Y.a[t] - b.G.a[t];
    }
    for (int i = 0; i < n; ++i) h[i] = -rd[i];
    for (auto& b : bs)
      for (int i : b.vars) h[i] += inner_general(b.blk->A[i], b.G);
    // M dx - E^T dnu = h,  E dx = r_e
    for (int i = 0; i < n; ++i) minv_h[i] = h[i];
    linalg::chol_solve(Lm, minv_h.data());
    if (m > 0) {
      for (int r = 0; r < m; ++r) {
        rhs2[r] = r_e[r];
        rhs2[r] -= kernels::dot(p.E.row(r), minv_h.data(), n);
      }
      for (int r = 0; r < m; ++r) dnu_out[r] = rhs2[r];
      linalg::chol_solve(Lschur, dnu_out.data());
      for (int i = 0; i < n; ++i) {
        double acc = minv_h[i];
        acc += kernels::dot(MinvEt.row(i), dnu_out.data(), m);
        dx_out[i] = acc;
      }
    } else {
      dx_out = minv_h;
    }
    // dS = A(dx) + Rp;  dY = G - Sinv*A(dx)*Y, symmetrized
    for (auto& b : bs) {
      zero(b.w1);
      for (int i : b.vars)
        if (dx_out[i] != 0.0) add_coeff(b.blk->A[i], dx_out[i], b.w1);
      for (std::size_t t = 0; t < b.dS.a.size(); ++t)
        b.dS.a[t] = b.w1.a[t] + b.Rp.a[t];
      gemm_into(b.w1, b.Y, b.w2);
      gemm_into(b.Sinv, b.w2, b.w3);
      for (std::size_t t = 0; t < b.dY.a.size(); ++t)
        b.dY.a[t] = b.G.a[t] - b.w3.a[t];
      symmetrize(b.dY);
    }
  };

  auto step_to_boundary = [&](bool primal) {
    double alpha = std::numeric_limits<double>::infinity();
    for (auto& b : bs) {
      const Mat& L = primal ? b.Ls : b.Ly;
      const Mat& D = primal ? b.dS : b.dY;
      double lam = min_eig_whitened(L, D, b.w1, b.w2, b.col);
      if (lam < -1e-16) alpha = std::min(alpha, -1.0 / lam);
    }
    return alpha;
  };

  double pobj = 0.0, dobj = 0.0;

  for (iter = 1; iter <= opt.max_iterations; ++iter) {
    // Residuals: Rp = C + A(x) - S, r_e = g - E x, rd = c - A*(Y) - E^T nu
    double max_rp = 0.0;
    for (auto& b : bs) {
      for (std::size_t t = 0; t < b.Rp.a.size(); ++t)
        b.Rp.a[t] = b.blk->C.a[t] - b.S.a[t];
      for (int i : b.vars)
        if (x[i] != 0.0) add_coeff(b.blk->A[i], x[i], b.Rp);
      max_rp = std::max(max_rp, linalg::max_abs(b.Rp));
    }
    double max_re = 0.0;
    for (int r = 0; r < m; ++r) {
      r_e[r] = p.g[r] - kernels::dot(p.E.row(r), x.data(), n);
      max_re = std::max(max_re, std::abs(r_e[r]));
    }
    for (int i = 0; i < n; ++i) rd[i] = p.c[i];
    for (auto& b : bs)
      for (int i : b.vars) rd[i] -= inner_general(b.blk->A[i], b.Y);
    for (int r = 0; r < m; ++r)
      if (nu[r] != 0.0)
        for (int i = 0; i < n; ++i) rd[i] -= p.E(r, i) * nu[r];
    double max_rd = 0.0;
    for (double v : rd) max_rd = std::max(max_rd, std::abs(v));

    double gap = 0.0, cy = 0.0, ynorm2 = 0.0;
    for (auto& b : bs) {
      gap += frob_inner(b.S, b.Y);
      cy += frob_inner(b.blk->C, b.Y);
      ynorm2 += frob_inner(b.Y, b.Y);
    }
    double mu = gap / N;
    pobj = kernels::dot(p.c.data(), x.data(), n) + p.objective_offset;
    dobj = -cy + p.objective_offset;
    for (int r = 0; r < m; ++r) {
      dobj += p.g[r] * nu[r];
      ynorm2 += nu[r] * nu[r];
    }

    sol.rel_gap = std::abs(gap) / std::max(1.0, 0.5 * (std::abs(pobj) + std::abs(dobj)));
    sol.primal_infeas = std::max(max_rp / (1.0 + normC), max_re / (1.0 + normg));
    sol.dual_infeas = max_rd / (1.0 + normc);

    if (opt.verbose)
      std::fprintf(stderr,
                   "it %3d  pobj % .9e  dobj % .9e  gap %.2e  pinf %.2e  "
                   "dinf %.2e\n",
                   iter, pobj, dobj, sol.rel_gap, sol.primal_infeas,
                   sol.dual_infeas);

    double merit = std::max({sol.rel_gap / opt.tol, sol.primal_infeas / opt.feas_tol,
                             sol.dual_infeas / opt.feas_tol});
    if (merit < best.merit) {
      best.valid = true;
      best.merit = merit;
      best.x = x;
      best.nu = nu;
      best.Y.clear();
      for (auto& b : bs) best.Y.push_back(b.Y);
      best.pobj = pobj;
      best.dobj = dobj;
      best.rel_gap = sol.rel_gap;
      best.pinf = sol.primal_infeas;
      best.dinf = sol.dual_infeas;
      no_improve = 0;
    } else {
      ++no_improve;
    }

    if (merit <= 1.0) {
      sol.status = SolveStatus::optimal;
      break;
    }
    // Once close, stop grinding when progress has clearly ended; further
    // centering only erodes the dual iterate.
    if (no_improve >= 10 && best.merit <= 1e4) {
      sol.status = SolveStatus::stalled;
      break;
    }

    // Farkas-style divergence checks.
    double ynorm = std::sqrt(ynorm2);
    if (ynorm > 1e8) {
      // Improving dual ray: A*(Y)+E^T nu ~ 0 with positive ray objective.
      double hres = 0.0;
      for (int i = 0; i < n; ++i)
        hres = std::max(hres, std::abs(p.c[i] - rd[i]));
      double ray_obj = -cy;
      for (int r = 0; r < m; ++r) ray_obj += p.g[r] * nu[r];
      if (hres / ynorm < 1e-8 && ray_obj / ynorm > 1e-8) {
        sol.status = SolveStatus::primal_infeasible;
        break;
      }
    }
    double xnorm = std::sqrt(kernels::dot(x.data(), x.data(), n));
    if (xnorm > 1e8) {
      // Improving primal ray: c.xhat < 0, E xhat ~ 0, A(xhat) nearly PSD.
      double cx = kernels::dot(p.c.data(), x.data(), n) / xnorm;
      double ex = 0.0;
      for (int r = 0; r < m; ++r)
        ex = std::max(ex,
                      std::abs(kernels::dot(p.E.row(r), x.data(), n)) / xnorm);
      double lam_min = 0.0;
      for (auto& b : bs) {
        zero(b.w1);
        for (int i : b.vars)
          if (x[i] != 0.0) add_coeff(b.blk->A[i], x[i] / xnorm, b.w1);
        lam_min = std::min(lam_min, linalg::sym_min_eig(b.w1));
      }
      if (cx < -1e-8 && ex < 1e-8 && lam_min > -1e-8) {
        sol.status = SolveStatus::dual_infeasible;
        break;
      }
    }

    // Factorizations.  Breakdown after the first iteration means the
    // iterates ran into degenerate geometry; return them as-is so the
    // caller can still extract a penalty-corrected certificate.
    try {
      for (auto& b : bs) {
        chol_or_ridge(b.S, b.Ls, "primal slack");
        chol_or_ridge(b.Y, b.Ly, "dual variable");
        b.Sinv = linalg::chol_inverse(b.Ls);
      }
    } catch (const SolverError&) {
      if (iter == 1) throw;
      sol.status = SolveStatus::stalled;
      break;
    }

    // Schur complement M_ij = sum_k tr(A_i Sinv A_j Y).
    zero(M);
    for (auto& b : bs) {
      const int d = b.blk->dim;
      for (int j : b.vars) {
        zero(b.w1);
        sparse_mul_sym(b.blk->A[j], b.Y, b.w1);
        zero(b.w2);
        kernels::gemm_acc(b.Sinv.a.data(), b.w1.a.data(), b.w2.a.data(), d, d,
                          d);
        for (int i : b.vars) {
          if (i > j) break;
          M(i, j) += inner_general(b.blk->A[i], b.w2);
        }
      }
    }
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) M(j, i) = M(i, j);
    try {
      chol_or_ridge(M, Lm, "Schur complement");
    } catch (const SolverError&) {
      if (iter == 1) throw;
      sol.status = SolveStatus::stalled;
      break;
    }

    if (m > 0) {
      // MinvEt = M^{-1} E^T, schur = E M^{-1} E^T
      std::vector<double> colv(n);
      for (int r = 0; r < m; ++r) {
        for (int i = 0; i < n; ++i) colv[i] = p.E(r, i);
        linalg::chol_solve(Lm, colv.data());
        for (int i = 0; i < n; ++i) MinvEt(i, r) = colv[i];
      }
      for (int r = 0; r < m; ++r)
        for (int s2 = 0; s2 < m; ++s2) {
          double acc = 0.0;
          for (int i = 0; i < n; ++i) acc += p.E(r, i) * MinvEt(i, s2);
          schur(r, s2) = acc;
        }
      symmetrize(schur);
      try {
        chol_or_ridge(schur, Lschur, "equality Schur complement");
      } catch (const SolverError&) {
        if (iter == 1) throw;
        sol.status = SolveStatus::stalled;
        break;
      }
    }

    // Predictor (affine scaling).
    assemble_direction(0.0, false, dxa, dnua);
    for (auto& b : bs) {
      b.dSa = b.dS;
      b.dYa = b.dY;
    }
    double ap_aff = std::min(1.0, step_to_boundary(true));
    double ad_aff = std::min(1.0, step_to_boundary(false));
    double mu_aff = 0.0;
    for (auto& b : bs) {
      // <S + ap dSa, Y + ad dYa>
      mu_aff += frob_inner(b.S, b.Y) + ap_aff * frob_inner(b.dSa, b.Y) +
                ad_aff * frob_inner(b.S, b.dYa) +
                ap_aff * ad_aff * frob_inner(b.dSa, b.dYa);
    }
    mu_aff /= N;
    double ratio = std::max(0.0, mu_aff / mu);
    double sigma = std::clamp(ratio * ratio * ratio, 0.0, 1.0);

    // Corrector.
    assemble_direction(sigma * mu, true, dx, dnu);
    double ap = std::min(1.0, opt.step_fraction * step_to_boundary(true));
    double ad = std::min(1.0, opt.step_fraction * step_to_boundary(false));

    for (int i = 0; i < n; ++i) x[i] += ap * dx[i];
    for (int r = 0; r < m; ++r) nu[r] += ad * dnu[r];
    for (auto& b : bs) {
      kernels::axpy(ap, b.dS.a.data(), b.S.a.data(), b.S.a.size());
      kernels::axpy(ad, b.dY.a.data(), b.Y.a.data(), b.Y.a.size());
    }

    if (ap < 1e-10 && ad < 1e-10) {
      if (++stall >= 3) {
        sol.status = SolveStatus::stalled;
        break;
      }
    } else {
      stall = 0;
    }
  }

  sol.iterations = std::min(iter, opt.max_iterations);
  bool ray = sol.status == SolveStatus::primal_infeasible ||
             sol.status == SolveStatus::dual_infeasible;
  if (!ray && best.valid) {
    sol.x = best.x;
    sol.eq_mult = best.nu;
    sol.objective = best.pobj;
    sol.dual_objective = best.dobj;
    sol.Y = best.Y;
    sol.rel_gap = best.rel_gap;
    sol.primal_infeas = best.pinf;
    sol.dual_infeas = best.dinf;
  } else {
    sol.x = x;
    sol.eq_mult = nu;
    sol.objective = pobj;
    sol.dual_objective = dobj;
    sol.Y.clear();
    for (auto& b : bs) sol.Y.push_back(b.Y);
  }
  return sol;
}

namespace {

Mat clip_psd(const Mat& Y) {
  Mat sym = Y;
  symmetrize(sym);
  std::vector<double> w;
  Mat V;
  linalg::sym_eig(sym, w, V);
  const int d = Y.rows;
  Mat out(d, d);
  for (int e = 0; e < d; ++e) {
    if (w[e] <= 0.0) continue;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) out(i, j) += w[e] * V(i, e) * V(j, e);
  }
  symmetrize(out);
  return out;
}

}  // namespace

CertifiedBound certified_lower_bound_from_dual(const SdpProblem& p,
                                               const std::vector<linalg::Mat>& Y,
                                               const std::vector<double>& eq_mult,
                                               double repair_tol) {
  p.validate();
  if (Y.size() != p.blocks.size())
    throw ValidationError("dual has wrong number of blocks");
  if (static_cast<int>(eq_mult.size()) != p.num_eq())
    throw ValidationError("dual has wrong number of equality multipliers");
  const int n = p.nvars;
  std::vector<Mat> Yhat;
  Yhat.reserve(Y.size());
  for (std::size_t k = 0; k < Y.size(); ++k) {
    if (Y[k].rows != p.blocks[k].dim || Y[k].cols != p.blocks[k].dim)
      throw ValidationError("dual block has wrong shape");
    Yhat.push_back(clip_psd(Y[k]));
  }
  // r = c - A*(Yhat) - E^T nu
  std::vector<double> r(p.c);
  for (std::size_t k = 0; k < Yhat.size(); ++k)
    for (int i = 0; i < n; ++i)
      if (!p.blocks[k].A[i].empty())
        r[i] -= inner_general(p.blocks[k].A[i], Yhat[k]);
  for (int row = 0; row < p.num_eq(); ++row)
    if (eq_mult[row] != 0.0)
      for (int i = 0; i < n; ++i) r[i] -= p.E(row, i) * eq_mult[row];

  CertifiedBound cb;
  for (int i = 0; i < n; ++i) {
    double ri = std::abs(r[i]);
    cb.max_residual = std::max(cb.max_residual, ri);
    double beta = p.var_bound.empty() ? 0.0 : p.var_bound[i];
    if (beta > 0.0) {
      cb.penalty += ri * beta;
    } else if (ri > repair_tol) {
      throw CertificateError(
          "dual residual exceeds repair tolerance on an unbounded variable");
    }
  }
  double value = -cb.penalty + p.objective_offset;
  for (std::size_t k = 0; k < Yhat.size(); ++k)
    value -= frob_inner(p.blocks[k].C, Yhat[k]);
  for (int row = 0; row < p.num_eq(); ++row)
    value += p.g[row] * eq_mult[row];
  cb.value = value;
  return cb;
}

CertifiedBound certified_lower_bound(const SdpProblem& p, const SdpSolution& sol,
                                     double repair_tol) {
  return certified_lower_bound_from_dual(p, sol.Y, sol.eq_mult, repair_tol);
}

void write_sparse_dump(const SdpProblem& p, std::ostream& out) {
  char buf[64];
  auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "sdp 1\n";
  out << "nvars " << p.nvars << "\n";
  out << "offset " << fmt(p.objective_offset) << "\n";
  for (int i = 0; i < p.nvars; ++i)
    out << "c " << i << " " << fmt(p.c[i]) << "\n";
  if (!p.var_bound.empty())
    for (int i = 0; i < p.nvars; ++i)
      out << "bound " << i << " " << fmt(p.var_bound[i]) << "\n";
  for (std::size_t k = 0; k < p.blocks.size(); ++k) {
    const Block& b = p.blocks[k];
    out << "block " << k << " dim " << b.dim << "\n";
    for (int i = 0; i < b.dim; ++i)
      for (int j = i; j < b.dim; ++j)
        if (b.C(i, j) != 0.0)
          out << "entry " << k << " " << i << " " << j << " -1 "
              << fmt(b.C(i, j)) << "\n";
    for (int v = 0; v < p.nvars; ++v)
      for (const auto& t : b.A[v])
        out << "entry " << k << " " << t.row << " " << t.col << " " << v << " "
            << fmt(t.value) << "\n";
  }
  for (int r = 0; r < p.num_eq(); ++r) {
    for (int i = 0; i < p.nvars; ++i)
      if (p.E(r, i) != 0.0)
        out << "eq " << r << " " << i << " " << fmt(p.E(r, i)) << "\n";
    out << "rhs " << r << " " << fmt(p.g[r]) << "\n";
  }
}

}  // namespace qcert::sdp
