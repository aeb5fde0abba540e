#pragma once
// Semidefinite programming in linear-matrix-inequality form:
//
//   minimize    c.x + offset
//   subject to  S_k(x) = C_k + sum_i x_i A_{k,i}  PSD   for each block k
//               E x = g                                 (optional)
//
// solved by an infeasible-start primal-dual interior-point method with
// Mehrotra predictor-corrector steps in the HKM direction. The solver is
// deterministic: identical inputs give bit-identical iterates. A separate
// certification step turns the numerical dual into a rigorous lower bound
// on the primal optimum by clipping the dual to PSD and charging the
// remaining stationarity residual against declared variable bounds.

#include <iosfwd>
#include <vector>

#include "qcert/linalg.hpp"

namespace qcert::sdp {

// One entry of a symmetric coefficient matrix, upper triangle (row <= col);
// the value is implied at the mirrored position too.
struct Triplet {
  int row = 0, col = 0;
  double value = 0.0;
};

struct Block {
  int dim = 0;
  linalg::Mat C;                        // dim x dim, symmetric
  std::vector<std::vector<Triplet>> A;  // nvars lists, each possibly empty
};

struct SdpProblem {
  int nvars = 0;
  std::vector<double> c;
  double objective_offset = 0.0;
  std::vector<Block> blocks;
  linalg::Mat E;          // num_eq x nvars (rows may be 0)
  std::vector<double> g;  // num_eq
  // Declared a-priori bounds |x_i| <= var_bound[i] satisfied by every
  // feasible point; entries <= 0 mean "no bound declared". Used only by
  // certification, never by the solver.
  std::vector<double> var_bound;

  int num_eq() const { return E.rows; }
  // Shape and symmetry checks (triplets in the upper triangle, C symmetric
  // within 1e-12); throws ValidationError.
  void validate() const;
};

enum class SolveStatus {
  optimal,
  primal_infeasible,
  dual_infeasible,
  max_iterations,
  stalled,
};
const char* to_string(SolveStatus s);

struct SolveOptions {
  double tol = 1e-7;        // relative duality gap target
  double feas_tol = 1e-8;   // relative primal/dual residual target
  int max_iterations = 200;
  double step_fraction = 0.98;  // fraction of the distance to the boundary
  bool verbose = false;
};

struct SdpSolution {
  SolveStatus status = SolveStatus::max_iterations;
  std::vector<double> x;
  double objective = 0.0;       // c.x + offset
  double dual_objective = 0.0;  // -<C,Y> + g.nu + offset
  std::vector<linalg::Mat> Y;   // one PSD multiplier per block
  std::vector<double> eq_mult;  // nu, one per equality row
  double rel_gap = 0.0;
  double primal_infeas = 0.0;  // scaled max residual of S = C + A(x)
  double dual_infeas = 0.0;    // scaled max residual of A*(Y) + E^T nu = c
  int iterations = 0;
};

// Throws SolverError on numerical breakdown (never on clean infeasibility,
// which is reported through status).
SdpSolution solve(const SdpProblem& p, const SolveOptions& opt = {});

struct CertifiedBound {
  double value = 0.0;         // rigorous lower bound on the primal optimum
  double penalty = 0.0;       // slack charged against declared bounds
  double max_residual = 0.0;  // stationarity residual before repair
};

// Clips Y to the PSD cone exactly and accounts for the dual residual
// r = c - A*(Y) - E^T nu: each |r_i| is charged var_bound[i]; variables
// without a declared bound must have |r_i| <= repair_tol or a
// CertificateError is thrown. The returned value never exceeds the
// reported dual objective and is a true bound independent of solver
// accuracy.
CertifiedBound certified_lower_bound(const SdpProblem& p, const SdpSolution& sol,
                                     double repair_tol = 1e-9);

// Re-evaluates a stored dual (Y blocks + equality multipliers) against a
// freshly built problem; used by artifact verification.
CertifiedBound certified_lower_bound_from_dual(const SdpProblem& p,
                                               const std::vector<linalg::Mat>& Y,
                                               const std::vector<double>& eq_mult,
                                               double repair_tol = 1e-9);

// Plain-text dump of the full problem data (deterministic formatting),
// for debugging and external cross-checks.
void write_sparse_dump(const SdpProblem& p, std::ostream& out);

}  // namespace qcert::sdp
