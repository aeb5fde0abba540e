// Born-rule behavior computation and finite-sample count generation.

#include "qcert/qsim.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "qcert/errors.hpp"
#include "qcert/rng.hpp"

namespace qcert::qsim {

namespace {
constexpr double kPi = std::numbers::pi;
}

CMat pauli(char which) {
  CMat m(2, 2);
  switch (which) {
    case 'i':
      m(0, 0) = 1.0;
      m(1, 1) = 1.0;
      break;
    case 'x':
      m(0, 1) = 1.0;
      m(1, 0) = 1.0;
      break;
    case 'y':
      m(0, 1) = cplx(0.0, -1.0);
      m(1, 0) = cplx(0.0, 1.0);
      break;
    case 'z':
      m(0, 0) = 1.0;
      m(1, 1) = -1.0;
      break;
    default:
      throw ValidationError("unknown Pauli label");
  }
  return m;
}

void PureState::validate() const {
  double n2 = 0.0;
  for (const auto& a : amp) n2 += std::norm(a);
  if (std::abs(n2 - 1.0) > 1e-12)
    throw ValidationError("pure state is not normalized");
}

PureState target_state(double theta) {
  if (!(theta > 0.0) || theta > kPi / 4.0 + 1e-12)
    throw ValidationError("theta outside (0, pi/4]");
  PureState psi;
  psi.amp[0] = std::cos(theta);
  psi.amp[3] = std::sin(theta);
  return psi;
}

void DensityMatrix::validate() const {
  if (m.rows != m.cols) throw ValidationError("density matrix is not square");
  if (linalg::herm_deviation(m) > 1e-12)
    throw ValidationError("density matrix is not Hermitian");
  cplx tr = linalg::trace(m);
  if (std::abs(tr - cplx(1.0, 0.0)) > 1e-12)
    throw ValidationError("density matrix trace is not 1");
  if (linalg::herm_min_eig(m) < -1e-10)
    throw ValidationError("density matrix has a negative eigenvalue");
}

DensityMatrix density_from_pure(const PureState& psi) {
  psi.validate();
  DensityMatrix rho;
  rho.m = CMat(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      rho.m(i, j) = psi.amp[i] * std::conj(psi.amp[j]);
  return rho;
}

DensityMatrix apply_depolarizing(const DensityMatrix& rho, double p) {
  if (p < 0.0 || p > 1.0) throw ValidationError("depolarizing weight outside [0,1]");
  int d = rho.m.rows;
  DensityMatrix out;
  out.m = linalg::cscale(p, rho.m);
  for (int i = 0; i < d; ++i) out.m(i, i) += (1.0 - p) / d;
  return out;
}

CMat observable(const MeasurementSetting& s) {
  CMat m = linalg::cscale(std::cos(s.angle), pauli('z'));
  return linalg::cadd(m, linalg::cscale(std::sin(s.angle), pauli('x')));
}

SettingSet ideal_measurements(double theta) {
  double mu = bell::mu_for_theta(theta);
  SettingSet s;
  s.a[0] = {Party::A, 0, 0.0};
  s.a[1] = {Party::A, 1, kPi / 2.0};
  s.b[0] = {Party::B, 0, mu};
  s.b[1] = {Party::B, 1, -mu};
  return s;
}

SettingSet apply_noise(const SettingSet& s, const NoiseModel& noise) {
  SettingSet out = s;
  for (int i = 0; i < 2; ++i) {
    out.a[i].angle += noise.a_offset[i] + noise.global_rotation;
    out.b[i].angle += noise.b_offset[i] + noise.global_rotation;
  }
  return out;
}

namespace {

// Projector onto outcome +1 / -1 of a +-1 observable: (I + sign*O)/2.
CMat outcome_projector(const CMat& obs, int sign) {
  CMat p = linalg::cscale(0.5 * sign, obs);
  for (int i = 0; i < p.rows; ++i) p(i, i) += 0.5;
  return p;
}

}  // namespace

bell::Behavior born_behavior(const DensityMatrix& rho, const SettingSet& s) {
  rho.validate();
  // Precompute the four single-qubit projectors per party.
  std::array<std::array<CMat, 2>, 2> pa;  // [setting][outcome index]
  std::array<std::array<CMat, 2>, 2> pb;
  for (int x = 0; x < 2; ++x) {
    CMat oa = observable(s.a[x]);
    CMat ob = observable(s.b[x]);
    for (int ia = 0; ia < 2; ++ia) {
      pa[x][ia] = outcome_projector(oa, ia == 0 ? 1 : -1);
      pb[x][ia] = outcome_projector(ob, ia == 0 ? 1 : -1);
    }
  }
  bell::Behavior beh;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int ia = 0; ia < 2; ++ia)
        for (int ib = 0; ib < 2; ++ib) {
          CMat proj = linalg::kron(pa[x][ia], pb[y][ib]);
          cplx val = linalg::trace(linalg::cmatmul(rho.m, proj));
          beh.p[bell::Behavior::index(x, y, ia, ib)] = val.real();
        }
  beh.validate();
  return beh;
}

bell::CountsRecord sample_counts(const bell::Behavior& b, const TrialPlan& plan,
                                 double theta_deg) {
  if (plan.trials_per_setting < 1)
    throw ValidationError("trials_per_setting must be >= 1");
  b.validate();
  bell::CountsRecord rec;
  rec.theta_deg = theta_deg;
  rec.trials_per_setting = plan.trials_per_setting;
  rec.counting_mode =
      plan.mode == CountingMode::multinomial ? "multinomial" : "poisson";
  rec.seed = plan.seed;
  rec.has_seed = true;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      rng::Xoshiro256pp gen(plan.seed, kBellStreamBase + 2 * x + y);
      std::vector<double> probs(4, 0.0);
      for (int ia = 0; ia < 2; ++ia)
        for (int ib = 0; ib < 2; ++ib)
          probs[2 * ia + ib] = b.p[bell::Behavior::index(x, y, ia, ib)];
      if (plan.mode == CountingMode::multinomial) {
        std::vector<std::uint64_t> n =
            rng::multinomial(gen, plan.trials_per_setting, probs);
        for (int k = 0; k < 4; ++k)
          rec.n[bell::Behavior::index(x, y, k / 2, k % 2)] = n[k];
      } else {
        for (int k = 0; k < 4; ++k) {
          double lambda =
              static_cast<double>(plan.trials_per_setting) * probs[k];
          rec.n[bell::Behavior::index(x, y, k / 2, k % 2)] =
              rng::poisson(gen, lambda);
        }
      }
    }
  return rec;
}

double fidelity_pure(const DensityMatrix& rho, const PureState& psi) {
  psi.validate();
  cplx acc = 0.0;
  for (int i = 0; i < rho.m.rows; ++i)
    for (int j = 0; j < rho.m.cols; ++j)
      acc += std::conj(psi.amp[i]) * rho.m(i, j) * psi.amp[j];
  return acc.real();
}

}  // namespace qcert::qsim
