// Builders and drivers for the two certification programs: behavior
// regularization (nearest compatible no-signaling behavior) and the
// certified fidelity minimization.

#include "qcert/certify.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "qcert/errors.hpp"

namespace qcert::certify {

using moments::Affine;
using moments::SchemaSet;
using sdp::Block;
using sdp::SdpProblem;
using sdp::Triplet;

namespace {

SolveDiagnostics diag_of(const sdp::SdpSolution& sol) {
  SolveDiagnostics d;
  d.status = sol.status;
  d.iterations = sol.iterations;
  d.rel_gap = sol.rel_gap;
  d.primal_infeas = sol.primal_infeas;
  d.dual_infeas = sol.dual_infeas;
  return d;
}

// Variable compression: shared schema ids -> problem column indices, with
// a fixed value assignment for the bound (known) ids.
struct VarMap {
  std::vector<int> to_col;      // schema id -> column or -1 (bound)
  std::vector<double> known;    // schema id -> value (valid where bound)
  std::vector<int> col_to_var;  // column -> schema id
  int ncols = 0;

  explicit VarMap(int nvars)
      : to_col(nvars, -2), known(nvars, 0.0) {}

  void bind(int id, double value) {
    to_col[id] = -1;
    known[id] = value;
  }
  int column(int id) {
    if (to_col[id] == -2) {
      to_col[id] = ncols++;
      col_to_var.push_back(id);
    }
    return to_col[id];
  }
  bool bound(int id) const { return to_col[id] == -1; }
};

// Add the moment matrix as one block: single-variable entries, knowns
// folded into the constant part.
void add_gamma_block(SdpProblem& p, VarMap& vm, const SchemaSet& s) {
  Block blk;
  blk.dim = s.gamma.dim;
  blk.C = linalg::Mat(blk.dim, blk.dim);
  std::vector<std::vector<Triplet>> cols;  // by column, assembled below
  for (int i = 0; i < blk.dim; ++i)
    for (int j = i; j < blk.dim; ++j) {
      int id = s.gamma.at(i, j);
      if (vm.bound(id)) {
        blk.C(i, j) = vm.known[id];
        blk.C(j, i) = vm.known[id];
      } else {
        int col = vm.column(id);
        if (col >= static_cast<int>(cols.size())) cols.resize(col + 1);
        cols[col].push_back({i, j, 1.0});
      }
    }
  blk.A = std::move(cols);
  p.blocks.push_back(std::move(blk));
}

void add_localizing_block(SdpProblem& p, VarMap& vm,
                          const moments::LocalizingSchema& loc) {
  Block blk;
  blk.dim = loc.dim;
  blk.C = linalg::Mat(blk.dim, blk.dim);
  std::vector<std::vector<Triplet>> cols;
  for (int i = 0; i < blk.dim; ++i)
    for (int j = i; j < blk.dim; ++j) {
      const Affine& f = loc.at(i, j);
      double c0 = f.constant;
      for (const auto& [id, coeff] : f.terms) {
        if (vm.bound(id)) {
          c0 += coeff * vm.known[id];
        } else {
          int col = vm.column(id);
          if (col >= static_cast<int>(cols.size())) cols.resize(col + 1);
          cols[col].push_back({i, j, coeff});
        }
      }
      blk.C(i, j) = c0;
      blk.C(j, i) = c0;
    }
  blk.A = std::move(cols);
  p.blocks.push_back(std::move(blk));
}

// |x| <= limit as the 2x2 PSD block [[limit, x], [x, limit]]; used for
// variables that no unit-diagonal moment-matrix minor already boxes.
void add_bound_block(SdpProblem& p, int col, double limit) {
  Block blk;
  blk.dim = 2;
  blk.C = linalg::Mat(2, 2);
  blk.C(0, 0) = limit;
  blk.C(1, 1) = limit;
  std::vector<std::vector<Triplet>> cols(col + 1);
  cols[col].push_back({0, 1, 1.0});
  blk.A = std::move(cols);
  p.blocks.push_back(std::move(blk));
}

// lo <= x <= hi as two 1x1 blocks: hi - x >= 0 and x - lo >= 0.
void add_interval_blocks(SdpProblem& p, int col, double lo, double hi) {
  Block up;
  up.dim = 1;
  up.C = linalg::Mat(1, 1);
  up.C(0, 0) = hi;
  up.A.resize(col + 1);
  up.A[col].push_back({0, 0, -1.0});
  p.blocks.push_back(std::move(up));
  Block down;
  down.dim = 1;
  down.C = linalg::Mat(1, 1);
  down.C(0, 0) = -lo;
  down.A.resize(col + 1);
  down.A[col].push_back({0, 0, 1.0});
  p.blocks.push_back(std::move(down));
}

void add_hermiticity_rows(VarMap& vm,
                          const moments::LocalizingSchema& loc,
                          std::vector<std::vector<std::pair<int, double>>>& rows,
                          std::vector<double>& rhs) {
  for (const Affine& f : loc.hermiticity) {
    double g = -f.constant;
    std::vector<std::pair<int, double>> row;
    for (const auto& [id, coeff] : f.terms) {
      if (vm.bound(id))
        g -= coeff * vm.known[id];
      else
        row.emplace_back(vm.column(id), coeff);
    }
    if (row.empty()) {
      if (std::abs(g) > 1e-12)
        throw ValidationError("inconsistent fully-bound equality row");
      continue;
    }
    rows.push_back(std::move(row));
    rhs.push_back(g);
  }
}

// Pad every block's coefficient list to the final variable count and
// attach equality rows.
void finalize_problem(SdpProblem& p, const VarMap& vm,
                      const std::vector<std::vector<std::pair<int, double>>>& rows,
                      const std::vector<double>& rhs) {
  p.nvars = vm.ncols;
  for (auto& blk : p.blocks) blk.A.resize(p.nvars);
  if (p.c.empty()) p.c.assign(p.nvars, 0.0);
  p.c.resize(p.nvars, 0.0);
  if (!rows.empty()) {
    p.E = linalg::Mat(static_cast<int>(rows.size()), p.nvars);
    p.g = rhs;
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (const auto& [col, coeff] : rows[r]) p.E(static_cast<int>(r), col) = coeff;
  }
}

// Columns that already appear in the moment matrix are boxed to [-1,1] by
// its unit diagonal; box everything else explicitly so every declared
// var_bound is enforced by the problem itself.
void add_missing_bound_blocks(SdpProblem& p, const VarMap& vm,
                              const SchemaSet& s) {
  std::set<int> in_gamma;
  for (int id : s.gamma.entry)
    if (!vm.bound(id) && vm.to_col[id] >= 0) in_gamma.insert(vm.to_col[id]);
  for (int col = 0; col < vm.ncols; ++col)
    if (!in_gamma.count(col)) add_bound_block(p, col, 1.0);
}

std::array<double, 9> known_values(const bell::CorrelatorForm& c) {
  return {1.0,
          c.mA[0],
          c.mA[1],
          c.mB[0],
          c.mB[1],
          c.corr[0][0],
          c.corr[0][1],
          c.corr[1][0],
          c.corr[1][1]};
}

void set_objective(SdpProblem& p, VarMap& vm, const Affine& obj) {
  p.objective_offset = obj.constant;
  std::vector<double> c;
  for (const auto& [id, coeff] : obj.terms) {
    if (vm.bound(id)) {
      p.objective_offset += coeff * vm.known[id];
    } else {
      int col = vm.column(id);
      if (col >= static_cast<int>(c.size())) c.resize(col + 1, 0.0);
      c[col] += coeff;
    }
  }
  p.c = std::move(c);
}

}  // namespace

sdp::SdpProblem build_swap_problem(const bell::CorrelatorForm& c, double theta,
                                   double known_slack) {
  if (known_slack <= 0.0) throw ValidationError("known_slack must be > 0");
  const SchemaSet& s = moments::default_schemas();
  VarMap vm(s.vars.size());
  vm.bind(s.known_ids[0], 1.0);
  auto vals = known_values(c);

  SdpProblem p;
  set_objective(p, vm, moments::fidelity_objective(theta));
  add_gamma_block(p, vm, s);
  add_localizing_block(p, vm, s.loc_plus);
  add_localizing_block(p, vm, s.loc_minus);
  // Observed correlators are held in a tiny interval rather than pinned
  // exactly: exactly-pinned extremal data leaves no interior point and the
  // solver cannot follow a central path.  Widening the feasible set can
  // only lower the certified minimum, so the bound stays valid.
  for (int k = 1; k < 9; ++k)
    add_interval_blocks(p, vm.column(s.known_ids[k]), vals[k] - known_slack,
                        vals[k] + known_slack);
  std::vector<std::vector<std::pair<int, double>>> rows;
  std::vector<double> rhs;
  add_hermiticity_rows(vm, s.loc_plus, rows, rhs);
  add_hermiticity_rows(vm, s.loc_minus, rows, rhs);
  add_missing_bound_blocks(p, vm, s);
  finalize_problem(p, vm, rows, rhs);
  p.var_bound.assign(p.nvars, 1.0);
  return p;
}

sdp::SdpProblem build_swap_problem_eps(double theta, double eps,
                                       double floor_eps) {
  if (eps < 0.0) throw ValidationError("eps must be >= 0");
  // eps = 0 pins the violation exactly at the quantum maximum, which has
  // no interior; a tiny floor keeps the solver on a central path and only
  // widens the minimization.
  eps = std::max(eps, floor_eps);
  const SchemaSet& s = moments::default_schemas();
  VarMap vm(s.vars.size());
  vm.bind(s.known_ids[0], 1.0);  // identity only; data enters through I_alpha

  SdpProblem p;
  set_objective(p, vm, moments::fidelity_objective(theta));
  add_gamma_block(p, vm, s);
  add_localizing_block(p, vm, s.loc_plus);
  add_localizing_block(p, vm, s.loc_minus);
  std::vector<std::vector<std::pair<int, double>>> rows;
  std::vector<double> rhs;
  add_hermiticity_rows(vm, s.loc_plus, rows, rhs);
  add_hermiticity_rows(vm, s.loc_minus, rows, rhs);

  // I_alpha >= quantum_max - eps as a 1x1 block.
  double alpha = bell::alpha_for_theta(theta);
  Block viol;
  viol.dim = 1;
  viol.C = linalg::Mat(1, 1);
  viol.C(0, 0) = -(bell::quantum_max(alpha) - eps);
  std::vector<std::vector<Triplet>> cols;
  auto addterm = [&](int slot, double coeff) {
    int col = vm.column(s.known_ids[slot]);
    if (col >= static_cast<int>(cols.size())) cols.resize(col + 1);
    cols[col].push_back({0, 0, coeff});
  };
  addterm(1, alpha);  // <A0>
  addterm(5, 1.0);    // <A0B0>
  addterm(6, 1.0);    // <A0B1>
  addterm(7, 1.0);    // <A1B0>
  addterm(8, -1.0);   // <A1B1>
  viol.A = std::move(cols);
  p.blocks.push_back(std::move(viol));

  add_missing_bound_blocks(p, vm, s);
  finalize_problem(p, vm, rows, rhs);
  p.var_bound.assign(p.nvars, 1.0);
  return p;
}

namespace {

FidelityCertificate certify_from_problem(sdp::SdpProblem& p, double theta,
                                         const CertifyOptions& opt) {
  sdp::SolveOptions sopt;
  sopt.tol = opt.tol;
  sopt.feas_tol = opt.feas_tol;
  sopt.max_iterations = opt.max_iterations;
  sdp::SdpSolution sol = sdp::solve(p, sopt);
  if (sol.status == sdp::SolveStatus::primal_infeasible)
    throw SolverError(
        "fidelity program reported infeasible; regularized inputs always "
        "admit a completion, so this indicates corrupted inputs");
  FidelityCertificate cert;
  cert.theta = theta;
  cert.diag = diag_of(sol);
  cert.primal_objective = sol.objective;
  sdp::CertifiedBound cb = sdp::certified_lower_bound(p, sol);
  cert.certificate_value = cb.value;
  cert.certificate_penalty = cb.penalty;
  cert.f_s = std::max(0.0, cb.value);
  cert.certificate_valid = true;
  cert.dual_blocks = sol.Y;
  cert.eq_multipliers = sol.eq_mult;
  return cert;
}

}  // namespace

FidelityCertificate swap_fidelity(const bell::CorrelatorForm& c, double theta,
                                  const CertifyOptions& opt) {
  sdp::SdpProblem p = build_swap_problem(c, theta, opt.known_slack);
  FidelityCertificate cert = certify_from_problem(p, theta, opt);
  cert.source = BoundSource::behavior_constrained;
  return cert;
}

std::vector<RobustPoint> robust_curve(double theta,
                                      const std::vector<double>& eps_grid,
                                      const CertifyOptions& opt) {
  std::vector<RobustPoint> out;
  out.reserve(eps_grid.size());
  for (double eps : eps_grid) {
    sdp::SdpProblem p = build_swap_problem_eps(theta, eps);
    FidelityCertificate cert = certify_from_problem(p, theta, opt);
    cert.source = BoundSource::epsilon_constrained;
    cert.epsilon = eps;
    out.push_back({eps, cert.f_s});
  }
  return out;
}

Nqa2Result nqa2_regularize(const bell::Behavior& raw, const Nqa2Options& opt) {
  raw.validate();
  const SchemaSet& s = moments::default_schemas();
  VarMap vm(s.vars.size());
  vm.bind(s.known_ids[0], 1.0);

  SdpProblem p;
  add_gamma_block(p, vm, s);
  std::vector<std::vector<std::pair<int, double>>> rows;
  std::vector<double> rhs;
  if (opt.include_localizing) {
    add_localizing_block(p, vm, s.loc_plus);
    add_localizing_block(p, vm, s.loc_minus);
    add_hermiticity_rows(vm, s.loc_plus, rows, rhs);
    add_hermiticity_rows(vm, s.loc_minus, rows, rhs);
  }

  // Distance variable: its column is past every moment column.
  int nmoment_cols = vm.ncols;
  int s_col = nmoment_cols;  // claimed below via finalize sizing

  // Schur block [[s I, P - f], [(P - f)^T, s]] of dimension 17.
  Block schur;
  schur.dim = 17;
  schur.C = linalg::Mat(17, 17);
  std::vector<std::vector<Triplet>> cols(s_col + 1);
  for (int d = 0; d < 17; ++d) cols[s_col].push_back({d, d, 1.0});
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int ia = 0; ia < 2; ++ia)
        for (int ib = 0; ib < 2; ++ib) {
          int r = bell::Behavior::index(x, y, ia, ib);
          double a = ia == 0 ? 1.0 : -1.0;
          double b = ib == 0 ? 1.0 : -1.0;
          // P = (1 + a<Ax> + b<By> + ab<AxBy>)/4
          schur.C(r, 16) = 0.25 - raw.p[r];
          schur.C(16, r) = schur.C(r, 16);
          cols[vm.column(s.known_ids[1 + x])].push_back({r, 16, 0.25 * a});
          cols[vm.column(s.known_ids[3 + y])].push_back({r, 16, 0.25 * b});
          cols[vm.column(s.known_ids[5 + 2 * x + y])].push_back(
              {r, 16, 0.25 * a * b});
        }
  if (vm.ncols != nmoment_cols)
    throw SolverError("schema is missing a correlator-level moment");
  schur.A = std::move(cols);
  p.blocks.push_back(std::move(schur));

  // Redundant box 0 <= s <= 8 keeps every variable's declared bound
  // enforced by the problem itself.
  Block cap;
  cap.dim = 1;
  cap.C = linalg::Mat(1, 1);
  cap.C(0, 0) = 8.0;
  cap.A.resize(s_col + 1);
  cap.A[s_col].push_back({0, 0, -1.0});
  p.blocks.push_back(std::move(cap));

  add_missing_bound_blocks(p, vm, s);

  // Manually account for the s column, which lives outside the VarMap.
  p.nvars = s_col + 1;
  for (auto& blk : p.blocks) blk.A.resize(p.nvars);
  p.c.assign(p.nvars, 0.0);
  p.c[s_col] = 1.0;
  if (!rows.empty()) {
    p.E = linalg::Mat(static_cast<int>(rows.size()), p.nvars);
    p.g = rhs;
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (const auto& [col, coeff] : rows[r]) p.E(static_cast<int>(r), col) = coeff;
  }
  p.var_bound.assign(p.nvars, 1.0);
  p.var_bound[s_col] = 8.0;

  sdp::SolveOptions sopt;
  sopt.tol = opt.tol;
  sopt.feas_tol = opt.feas_tol;
  sopt.max_iterations = opt.max_iterations;
  sdp::SdpSolution sol = sdp::solve(p, sopt);
  if (sol.status != sdp::SolveStatus::optimal)
    throw SolverError(std::string("behavior regularization did not converge "
                                  "(status ") +
                      sdp::to_string(sol.status) +
                      "); the program is always feasible, so this indicates "
                      "a numerical problem");

  Nqa2Result out;
  out.diag = diag_of(sol);
  out.s = sol.x[s_col];
  bell::CorrelatorForm cf;
  cf.mA[0] = sol.x[vm.to_col[s.known_ids[1]]];
  cf.mA[1] = sol.x[vm.to_col[s.known_ids[2]]];
  cf.mB[0] = sol.x[vm.to_col[s.known_ids[3]]];
  cf.mB[1] = sol.x[vm.to_col[s.known_ids[4]]];
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      cf.corr[x][y] = sol.x[vm.to_col[s.known_ids[5 + 2 * x + y]]];
  out.correlators = cf;
  out.regularized = bell::from_correlators(cf);
  out.moment_vector.assign(s.vars.size(), 0.0);
  out.moment_vector[0] = 1.0;
  for (int id = 0; id < s.vars.size(); ++id)
    if (vm.to_col[id] >= 0) out.moment_vector[id] = sol.x[vm.to_col[id]];
  return out;
}

PipelineResult certify_behavior(const bell::Behavior& raw, double theta,
                                const Nqa2Options& nqa2_opt,
                                const CertifyOptions& cert_opt) {
  PipelineResult res;
  res.raw = raw;
  res.raw_signaling = bell::signaling_deficit(res.raw);
  res.nqa2 = nqa2_regularize(res.raw, nqa2_opt);
  res.regularized_signaling = bell::signaling_deficit(res.nqa2.regularized);
  res.cert = swap_fidelity(res.nqa2.correlators, theta, cert_opt);
  return res;
}

PipelineResult certify_pipeline(const bell::CountsRecord& counts, double theta,
                                const Nqa2Options& nqa2_opt,
                                const CertifyOptions& cert_opt) {
  return certify_behavior(bell::behavior_from_counts(counts), theta, nqa2_opt,
                          cert_opt);
}

}  // namespace qcert::certify
