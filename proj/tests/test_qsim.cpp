// Quantum model tests: target states, depolarizing noise, Born behaviors,
// measurement noise, and the seeded counting paths.

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "qcert/bell.hpp"
#include "qcert/errors.hpp"
#include "qcert/qsim.hpp"

using namespace qcert;

namespace {
constexpr double kDeg = std::numbers::pi / 180.0;
}

TEST_SUITE("qsim") {

TEST_CASE("target state amplitudes and normalization") {
  for (double td : {15.0, 30.0, 45.0}) {
    double theta = td * kDeg;
    auto psi = qsim::target_state(theta);
    psi.validate();
    CHECK(psi.amp[0].real() == doctest::Approx(std::cos(theta)));
    CHECK(psi.amp[3].real() == doctest::Approx(std::sin(theta)));
    CHECK(std::abs(psi.amp[1]) == doctest::Approx(0.0).scale(1.0));
    CHECK(std::abs(psi.amp[2]) == doctest::Approx(0.0).scale(1.0));
  }
  CHECK_THROWS_AS(qsim::target_state(0.0), ValidationError);
}

TEST_CASE("density matrices are physical") {
  auto rho = qsim::density_from_pure(qsim::target_state(30.0 * kDeg));
  rho.validate();
  CHECK(linalg::trace(rho.m).real() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(linalg::herm_min_eig(rho.m) >= -1e-12);
  CHECK(qsim::fidelity_pure(rho, qsim::target_state(30.0 * kDeg)) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("depolarizing interpolates toward the maximally mixed state") {
  double theta = 35.0 * kDeg;
  auto psi = qsim::target_state(theta);
  auto rho = qsim::density_from_pure(psi);
  for (double p : {1.0, 0.9, 0.5, 0.0}) {
    auto noisy = qsim::apply_depolarizing(rho, p);
    noisy.validate();
    CHECK(linalg::trace(noisy.m).real() == doctest::Approx(1.0).epsilon(1e-12));
    // Fidelity with the pure target has the closed form p + (1-p)/4.
    CHECK(qsim::fidelity_pure(noisy, psi) ==
          doctest::Approx(p + (1.0 - p) / 4.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(qsim::apply_depolarizing(rho, 1.5), ValidationError);
}

TEST_CASE("observables are Hermitian involutions") {
  auto s = qsim::ideal_measurements(40.0 * kDeg);
  for (const auto& setting : {s.a[0], s.a[1], s.b[0], s.b[1]}) {
    auto m = qsim::observable(setting);
    CHECK(linalg::herm_deviation(m) < 1e-14);
    auto sq = linalg::cmatmul(m, m);
    CHECK(linalg::frobenius_distance(sq, linalg::CMat::identity(2)) < 1e-12);
  }
}

TEST_CASE("Born behavior is a no-signaling distribution with ideal marginals") {
  double theta = 30.0 * kDeg;
  auto rho = qsim::density_from_pure(qsim::target_state(theta));
  auto b = qsim::born_behavior(rho, qsim::ideal_measurements(theta));
  b.validate();
  CHECK(bell::signaling_deficit(b).max_deficit < 1e-14);
  auto c = bell::to_correlators(b);
  // <A0> = cos 2 theta for the first (z) setting; <A1> = 0 for the x setting.
  CHECK(c.mA[0] == doctest::Approx(std::cos(2.0 * theta)).epsilon(1e-12));
  CHECK(c.mA[1] == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("measurement offsets move the behavior continuously") {
  double theta = 45.0 * kDeg;
  auto rho = qsim::density_from_pure(qsim::target_state(theta));
  auto ideal = qsim::ideal_measurements(theta);

  qsim::NoiseModel none;
  auto same = qsim::apply_noise(ideal, none);
  auto b0 = qsim::born_behavior(rho, same);
  auto b1 = qsim::born_behavior(rho, ideal);
  for (int k = 0; k < 16; ++k) CHECK(b0.p[k] == doctest::Approx(b1.p[k]));

  qsim::NoiseModel bent;
  bent.a_offset[0] = 0.05;
  auto b2 = qsim::born_behavior(rho, qsim::apply_noise(ideal, bent));
  double delta = 0.0;
  for (int k = 0; k < 16; ++k) delta = std::max(delta, std::abs(b2.p[k] - b1.p[k]));
  CHECK(delta > 1e-4);
  CHECK(delta < 0.05);
  // Still a valid quantum behavior: no signaling.
  CHECK(bell::signaling_deficit(b2).max_deficit < 1e-14);
}

TEST_CASE("global rotation of both analyzers preserves singlet-basis symmetry") {
  // At theta = 45 deg the target is Bell-like; rotating all analyzers by xi
  // about y leaves correlators of matched settings invariant in the x-z plane.
  double theta = 45.0 * kDeg;
  auto rho = qsim::density_from_pure(qsim::target_state(theta));
  qsim::NoiseModel rot;
  rot.global_rotation = 0.2;
  auto b_rot = qsim::born_behavior(rho, qsim::apply_noise(qsim::ideal_measurements(theta), rot));
  auto b_id = qsim::born_behavior(rho, qsim::ideal_measurements(theta));
  auto c_rot = bell::to_correlators(b_rot);
  auto c_id = bell::to_correlators(b_id);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      CHECK(c_rot.corr[x][y] == doctest::Approx(c_id.corr[x][y]).epsilon(1e-10));
}

TEST_CASE("multinomial sampling is seeded and conserves totals") {
  double theta = 45.0 * kDeg;
  auto b = qsim::born_behavior(qsim::density_from_pure(qsim::target_state(theta)),
                               qsim::ideal_measurements(theta));
  qsim::TrialPlan plan;
  plan.trials_per_setting = 5000;
  plan.seed = 11;
  auto c1 = qsim::sample_counts(b, plan, 45.0);
  auto c2 = qsim::sample_counts(b, plan, 45.0);
  CHECK(c1.n == c2.n);
  CHECK(c1.counting_mode == "multinomial");
  CHECK(c1.has_seed);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      CHECK(c1.setting_total(x, y) == plan.trials_per_setting);

  plan.seed = 12;
  auto c3 = qsim::sample_counts(b, plan, 45.0);
  CHECK(c1.n != c3.n);

  // Frequencies approach the behavior.
  plan.trials_per_setting = 200000;
  auto big = bell::behavior_from_counts(qsim::sample_counts(b, plan, 45.0));
  for (int k = 0; k < 16; ++k) CHECK(std::abs(big.p[k] - b.p[k]) < 0.01);
}

TEST_CASE("poisson sampling draws fluctuating totals") {
  double theta = 45.0 * kDeg;
  auto b = qsim::born_behavior(qsim::density_from_pure(qsim::target_state(theta)),
                               qsim::ideal_measurements(theta));
  qsim::TrialPlan plan;
  plan.trials_per_setting = 1000;
  plan.mode = qsim::CountingMode::poisson;
  plan.seed = 4;
  auto c = qsim::sample_counts(b, plan, 45.0);
  CHECK(c.counting_mode == "poisson");
  bool any_off_total = false;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      auto total = c.setting_total(x, y);
      CHECK(total > 800);
      CHECK(total < 1200);
      any_off_total |= total != plan.trials_per_setting;
    }
  CHECK(any_off_total);
}

}  // TEST_SUITE
