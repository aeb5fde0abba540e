// Pauli-basis tomography: estimation, inversion, physical projection, and
// the miscalibration demo.

#include "qcert/tomo.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "qcert/errors.hpp"
#include "qcert/rng.hpp"

namespace qcert::tomo {

using linalg::CMat;
using linalg::cplx;

namespace {

// sigma_0..sigma_3 = I, x, y, z
CMat pauli_by_index(int i) {
  switch (i) {
    case 0: return qsim::pauli('i');
    case 1: return qsim::pauli('x');
    case 2: return qsim::pauli('y');
    case 3: return qsim::pauli('z');
    default: throw ValidationError("Pauli index outside 0..3");
  }
}

// Projector onto the +-1 eigenspace of sigma_i (i in 1..3).
CMat pauli_projector(int i, int sign) {
  CMat p = linalg::cscale(0.5 * sign, pauli_by_index(i));
  for (int k = 0; k < 2; ++k) p(k, k) += 0.5;
  return p;
}

}  // namespace

void PauliExpectations::validate() const {
  if (std::abs(e[0][0] - 1.0) > 1e-12)
    throw ValidationError("identity expectation must be 1");
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (std::abs(e[i][j]) > 1.0 + 1e-9)
        throw ValidationError("Pauli expectation outside [-1,1]");
}

int basis_index(const std::string& basis) {
  for (int k = 0; k < 9; ++k)
    if (basis == kBases[k]) return k;
  throw ValidationError("unknown tomography basis '" + basis + "'");
}

std::uint64_t TomoCounts::basis_total(int k) const {
  std::uint64_t t = 0;
  for (int o = 0; o < 4; ++o) t += n[k][o];
  return t;
}

PauliExpectations expectations_from_state(const qsim::DensityMatrix& rho) {
  rho.validate();
  PauliExpectations out;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      CMat op = linalg::kron(pauli_by_index(i), pauli_by_index(j));
      out.e[i][j] = linalg::trace(linalg::cmatmul(rho.m, op)).real();
    }
  out.validate();
  return out;
}

TomoCounts sample_tomo_counts(const qsim::DensityMatrix& rho,
                              const qsim::TrialPlan& plan, double theta_deg) {
  if (plan.trials_per_setting < 1)
    throw ValidationError("trials_per_setting must be >= 1");
  rho.validate();
  TomoCounts rec;
  rec.theta_deg = theta_deg;
  rec.trials_per_setting = plan.trials_per_setting;
  rec.counting_mode =
      plan.mode == qsim::CountingMode::multinomial ? "multinomial" : "poisson";
  rec.seed = plan.seed;
  rec.has_seed = true;
  for (int k = 0; k < 9; ++k) {
    int ia = k / 3 + 1, ib = k % 3 + 1;
    std::vector<double> probs(4, 0.0);
    for (int oa = 0; oa < 2; ++oa)
      for (int ob = 0; ob < 2; ++ob) {
        CMat proj = linalg::kron(pauli_projector(ia, oa == 0 ? 1 : -1),
                                 pauli_projector(ib, ob == 0 ? 1 : -1));
        probs[2 * oa + ob] =
            linalg::trace(linalg::cmatmul(rho.m, proj)).real();
      }
    rng::Xoshiro256pp gen(plan.seed, qsim::kTomoStreamBase + k);
    if (plan.mode == qsim::CountingMode::multinomial) {
      std::vector<std::uint64_t> draws =
          rng::multinomial(gen, plan.trials_per_setting, probs);
      for (int o = 0; o < 4; ++o) rec.n[k][o] = draws[o];
    } else {
      for (int o = 0; o < 4; ++o)
        rec.n[k][o] = rng::poisson(
            gen, static_cast<double>(plan.trials_per_setting) * probs[o]);
    }
  }
  return rec;
}

PauliExpectations expectations_from_counts(const TomoCounts& counts) {
  // Relative frequencies and per-basis marginals.
  std::array<std::array<double, 4>, 9> f{};
  for (int k = 0; k < 9; ++k) {
    double total = static_cast<double>(counts.basis_total(k));
    if (total <= 0.0)
      throw ValidationError(std::string("empty tomography basis '") +
                            kBases[k] + "'");
    for (int o = 0; o < 4; ++o)
      f[k][o] = static_cast<double>(counts.n[k][o]) / total;
  }
  PauliExpectations out;
  out.e[0][0] = 1.0;
  for (int ia = 1; ia <= 3; ++ia)
    for (int ib = 1; ib <= 3; ++ib) {
      int k = 3 * (ia - 1) + (ib - 1);
      out.e[ia][ib] = f[k][0] - f[k][1] - f[k][2] + f[k][3];
    }
  // Single-party terms: the marginal of sigma_i on one side is estimated in
  // all three of the partner's bases; average them uniformly.
  for (int ia = 1; ia <= 3; ++ia) {
    double acc = 0.0;
    for (int ib = 1; ib <= 3; ++ib) {
      int k = 3 * (ia - 1) + (ib - 1);
      acc += f[k][0] + f[k][1] - f[k][2] - f[k][3];
    }
    out.e[ia][0] = acc / 3.0;
  }
  for (int ib = 1; ib <= 3; ++ib) {
    double acc = 0.0;
    for (int ia = 1; ia <= 3; ++ia) {
      int k = 3 * (ia - 1) + (ib - 1);
      acc += f[k][0] - f[k][1] + f[k][2] - f[k][3];
    }
    out.e[0][ib] = acc / 3.0;
  }
  return out;
}

CMat linear_inversion(const PauliExpectations& e) {
  CMat rho(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      if (e.e[i][j] == 0.0) continue;
      CMat op = linalg::kron(pauli_by_index(i), pauli_by_index(j));
      rho = linalg::cadd(rho, linalg::cscale(0.25 * e.e[i][j], op));
    }
  return rho;
}

qsim::DensityMatrix project_to_physical(const linalg::CMat& raw) {
  qsim::DensityMatrix rho;
  rho.m = linalg::herm_project_simplex(raw, 1.0);
  rho.validate();
  return rho;
}

double fidelity_from_counts(const TomoCounts& counts, double theta) {
  PauliExpectations e = expectations_from_counts(counts);
  qsim::DensityMatrix rho = project_to_physical(linear_inversion(e));
  return qsim::fidelity_pure(rho, qsim::target_state(theta));
}

double fidelity_from_expectations(const PauliExpectations& e, double theta) {
  qsim::DensityMatrix rho = project_to_physical(linear_inversion(e));
  return qsim::fidelity_pure(rho, qsim::target_state(theta));
}

MiscalibrationDemo miscalibration_demo(double p, double xi) {
  if (p < 0.0 || p > 1.0) throw ValidationError("mixing weight outside [0,1]");
  constexpr double kPhi = std::numbers::pi / 8.0;
  // Emitted state on one qubit.
  CMat phi(2, 1);
  phi(0, 0) = std::cos(kPhi);
  phi(1, 0) = std::sin(kPhi);
  CMat rho = linalg::cmatmul(phi, linalg::adjoint(phi));
  rho = linalg::cscale(p, rho);
  for (int i = 0; i < 2; ++i) rho(i, i) += (1.0 - p) / 2.0;
  // Analyzer axes rotated by xi in the x-z plane; y is unaffected.
  CMat sx = qsim::pauli('x'), sy = qsim::pauli('y'), sz = qsim::pauli('z');
  CMat meas_z = linalg::cadd(linalg::cscale(std::cos(xi), sz),
                             linalg::cscale(std::sin(xi), sx));
  CMat meas_x = linalg::cadd(linalg::cscale(std::cos(xi), sx),
                             linalg::cscale(std::sin(xi), sz));
  auto expect = [&rho](const CMat& op) {
    return linalg::trace(linalg::cmatmul(rho, op)).real();
  };
  // Naive reconstruction treats the rotated readings as true Pauli terms.
  double rx = expect(meas_x), ry = expect(sy), rz = expect(meas_z);
  CMat rec(2, 2);
  rec = linalg::cadd(linalg::cscale(rx, sx), linalg::cscale(ry, sy));
  rec = linalg::cadd(rec, linalg::cscale(rz, sz));
  rec = linalg::cscale(0.5, rec);
  for (int i = 0; i < 2; ++i) rec(i, i) += 0.5;
  auto pure_overlap = [&phi](const CMat& m) {
    return linalg::trace(
               linalg::cmatmul(linalg::cmatmul(linalg::adjoint(phi), m), phi))
        .real();
  };
  MiscalibrationDemo demo;
  demo.p = p;
  demo.xi = xi;
  demo.f_true = pure_overlap(rho);
  demo.f_reported = pure_overlap(rec);
  demo.false_positive = demo.f_reported > 1.0;
  return demo;
}

}  // namespace qcert::tomo
