#pragma once
// Device-independent certification pipeline: regularize finite-sample
// frequencies onto the quantum moment cone (nearest no-signaling behavior
// compatible with a PSD level-2 moment matrix), then minimize the
// extracted-state fidelity over all moment assignments consistent with
// the regularized data. Every reported fidelity bound is backed by a
// rigorous dual certificate, not just solver convergence.

#include <vector>

#include "qcert/bell.hpp"
#include "qcert/moments.hpp"
#include "qcert/sdp.hpp"

namespace qcert::certify {

struct SolveDiagnostics {
  sdp::SolveStatus status = sdp::SolveStatus::max_iterations;
  int iterations = 0;
  double rel_gap = 0.0;
  double primal_infeas = 0.0;
  double dual_infeas = 0.0;
};

struct Nqa2Options {
  // Also impose the two localizing matrices and their Hermiticity
  // equalities during regularization (slower; the moment matrix alone is
  // the standard choice and is what the fidelity stage re-imposes anyway).
  bool include_localizing = false;
  double tol = 1e-9;
  double feas_tol = 1e-9;
  int max_iterations = 200;
};

struct Nqa2Result {
  bell::Behavior regularized;       // nearest compatible behavior, exactly
                                    // no-signaling by construction
  bell::CorrelatorForm correlators; // its correlator form
  double s = 0.0;                   // Euclidean distance to the input
  // Values of every moment-matrix variable at the optimum (index = shared
  // schema variable id; entry 0 is the identity moment 1).
  std::vector<double> moment_vector;
  SolveDiagnostics diag;
};

// Projects a (generally signaling) frequency table onto the set of
// behaviors carrying a PSD level-2 moment matrix: minimizes s subject to
// || P(moments) - input ||_2 <= s. Throws SolverError if the solve fails;
// primal infeasibility cannot occur (the feasible set is nonempty).
Nqa2Result nqa2_regularize(const bell::Behavior& raw,
                           const Nqa2Options& opt = {});

enum class BoundSource { behavior_constrained, epsilon_constrained };

struct FidelityCertificate {
  double theta = 0.0;  // radians
  BoundSource source = BoundSource::behavior_constrained;
  double epsilon = 0.0;           // only for epsilon_constrained
  double f_s = 0.0;               // certified lower bound, floored at 0
  double certificate_value = 0.0; // un-floored certified bound
  double primal_objective = 0.0;  // solver primal value (diagnostic)
  double certificate_penalty = 0.0;
  bool certificate_valid = false;
  SolveDiagnostics diag;
  // Stored dual: enough to re-derive the certified value independently.
  std::vector<linalg::Mat> dual_blocks;
  std::vector<double> eq_multipliers;
};

struct CertifyOptions {
  double tol = 1e-7;
  double feas_tol = 1e-8;
  int max_iterations = 200;
  // Half-width of the interval each observed correlator is pinned to.
  // Exact pinning puts extremal inputs on the boundary of the feasible
  // cone (no strictly interior point exists there), which stalls the
  // interior-point solver; a tiny interval restores an interior while
  // only widening the minimization, so the bound stays valid.
  double known_slack = 1e-6;
};

// Fidelity program constrained by the eight observed correlator-level
// moments. Exposed so verification can rebuild the exact problem a stored
// certificate refers to.
sdp::SdpProblem build_swap_problem(const bell::CorrelatorForm& c, double theta,
                                   double known_slack = 1e-6);

// Variant constrained only by a tilted-Bell violation: I_alpha(theta)
// within eps of the quantum maximum.
sdp::SdpProblem build_swap_problem_eps(double theta, double eps,
                                       double floor_eps = 1e-6);

// Certified minimum fidelity over all moment assignments consistent with
// the given correlators (which must be no-signaling, e.g. regularized).
FidelityCertificate swap_fidelity(const bell::CorrelatorForm& c, double theta,
                                  const CertifyOptions& opt = {});

struct RobustPoint {
  double epsilon = 0.0;
  double f_s = 0.0;
};

// Certified fidelity as a function of the deviation from the maximal
// violation; nonincreasing in eps.
std::vector<RobustPoint> robust_curve(double theta,
                                      const std::vector<double>& eps_grid,
                                      const CertifyOptions& opt = {});

struct PipelineResult {
  bell::Behavior raw;
  bell::SignalingReport raw_signaling;
  Nqa2Result nqa2;
  bell::SignalingReport regularized_signaling;
  FidelityCertificate cert;
};

// frequencies -> regularization -> certified fidelity
PipelineResult certify_behavior(const bell::Behavior& raw, double theta,
                                const Nqa2Options& nqa2_opt = {},
                                const CertifyOptions& cert_opt = {});

// counts -> frequencies -> regularization -> certified fidelity
PipelineResult certify_pipeline(const bell::CountsRecord& counts, double theta,
                                const Nqa2Options& nqa2_opt = {},
                                const CertifyOptions& cert_opt = {});

}  // namespace qcert::certify
