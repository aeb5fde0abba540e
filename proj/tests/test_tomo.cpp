// Tomography tests: Pauli expectations, linear inversion round trips,
// physical projection, fidelity estimators, and the miscalibration demo.

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "qcert/errors.hpp"
#include "qcert/tomo.hpp"

using namespace qcert;

namespace {
constexpr double kDeg = std::numbers::pi / 180.0;
}

TEST_SUITE("tomo") {

TEST_CASE("basis labels round trip") {
  for (int k = 0; k < 9; ++k) CHECK(tomo::basis_index(tomo::kBases[k]) == k);
  CHECK_THROWS_AS(tomo::basis_index("qq"), ValidationError);
}

TEST_CASE("exact expectations of the target state") {
  double theta = 32.5 * kDeg;
  auto rho = qsim::density_from_pure(qsim::target_state(theta));
  auto e = tomo::expectations_from_state(rho);
  e.validate();
  CHECK(e.e[0][0] == doctest::Approx(1.0));
  CHECK(e.e[3][3] == doctest::Approx(1.0).epsilon(1e-12));                 // zz
  CHECK(e.e[1][1] == doctest::Approx(std::sin(2 * theta)).epsilon(1e-12)); // xx
  CHECK(e.e[2][2] == doctest::Approx(-std::sin(2 * theta)).epsilon(1e-12)); // yy
  CHECK(e.e[3][0] == doctest::Approx(std::cos(2 * theta)).epsilon(1e-12)); // z1
  CHECK(e.e[0][3] == doctest::Approx(std::cos(2 * theta)).epsilon(1e-12)); // 1z
  CHECK(e.e[1][2] == doctest::Approx(0.0).scale(1.0));                     // xy
}

TEST_CASE("linear inversion inverts exact expectations") {
  for (double td : {20.0, 37.5, 45.0}) {
    for (double p : {1.0, 0.9}) {
      auto rho = qsim::apply_depolarizing(
          qsim::density_from_pure(qsim::target_state(td * kDeg)), p);
      auto rec = tomo::linear_inversion(tomo::expectations_from_state(rho));
      CHECK(linalg::frobenius_distance(rec, rho.m) < 1e-12);
    }
  }
}

TEST_CASE("physical projection repairs an unphysical reconstruction") {
  auto rho = qsim::density_from_pure(qsim::target_state(40.0 * kDeg));
  // Push the matrix outside the PSD cone along a traceless direction.
  auto bad = rho.m;
  bad(1, 1) += 0.08;
  bad(2, 2) -= 0.08;
  CHECK(linalg::herm_min_eig(bad) < -1e-3);
  auto fixed = tomo::project_to_physical(bad);
  fixed.validate();
  CHECK(linalg::herm_min_eig(fixed.m) >= -1e-12);
  CHECK(linalg::trace(fixed.m).real() == doctest::Approx(1.0).epsilon(1e-12));
  // Projection of an already-physical matrix is the identity map.
  auto same = tomo::project_to_physical(rho.m);
  CHECK(linalg::frobenius_distance(same.m, rho.m) < 1e-10);
}

TEST_CASE("fidelity from exact expectations matches the state fidelity") {
  for (double p : {1.0, 0.95, 0.8}) {
    double theta = 30.0 * kDeg;
    auto rho = qsim::apply_depolarizing(
        qsim::density_from_pure(qsim::target_state(theta)), p);
    double f = tomo::fidelity_from_expectations(tomo::expectations_from_state(rho),
                                                theta);
    CHECK(f == doctest::Approx(p + (1.0 - p) / 4.0).epsilon(1e-12));
  }
}

TEST_CASE("sampled tomography is seeded and converges") {
  double theta = 45.0 * kDeg;
  auto rho = qsim::apply_depolarizing(
      qsim::density_from_pure(qsim::target_state(theta)), 0.97);
  qsim::TrialPlan plan;
  plan.trials_per_setting = 50000;
  plan.seed = 21;
  auto c1 = tomo::sample_tomo_counts(rho, plan, 45.0);
  auto c2 = tomo::sample_tomo_counts(rho, plan, 45.0);
  CHECK(c1.n == c2.n);
  for (int k = 0; k < 9; ++k) CHECK(c1.basis_total(k) == plan.trials_per_setting);

  double f_exact = 0.97 + 0.03 / 4.0;
  double f_est = tomo::fidelity_from_counts(c1, theta);
  CHECK(std::abs(f_est - f_exact) < 0.01);

  // Estimates differ across seeds (the estimator is genuinely statistical).
  plan.seed = 22;
  auto c3 = tomo::sample_tomo_counts(rho, plan, 45.0);
  CHECK(tomo::fidelity_from_counts(c3, theta) != f_est);
}

TEST_CASE("expectations from counts mirror the sampled frequencies") {
  double theta = 35.0 * kDeg;
  auto rho = qsim::density_from_pure(qsim::target_state(theta));
  qsim::TrialPlan plan;
  plan.trials_per_setting = 100000;
  plan.seed = 5;
  auto counts = tomo::sample_tomo_counts(rho, plan, 35.0);
  auto e = tomo::expectations_from_counts(counts);
  e.validate();
  auto exact = tomo::expectations_from_state(rho);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(std::abs(e.e[i][j] - exact.e[i][j]) < 0.02);
}

TEST_CASE("miscalibration inflates the reported fidelity") {
  // Perfect source, analyzers rotated 45 degrees: the naive reconstruction
  // reports (1+sqrt(2))/2, above one.
  auto demo = tomo::miscalibration_demo(1.0, std::numbers::pi / 4.0);
  CHECK(demo.f_true == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(demo.f_reported ==
        doctest::Approx((1.0 + std::numbers::sqrt2) / 2.0).epsilon(1e-9));
  CHECK(demo.false_positive);

  // No rotation: nothing to misreport.
  auto clean = tomo::miscalibration_demo(1.0, 0.0);
  CHECK(clean.f_reported == doctest::Approx(clean.f_true).epsilon(1e-12));
  CHECK_FALSE(clean.false_positive);

  // Mixed source, moderate rotation: closed form (1 + p(1/2 + sqrt(3)/2))/2,
  // still above one even at 80% survival.
  auto mixed = tomo::miscalibration_demo(0.8, std::numbers::pi / 6.0);
  double expected = (1.0 + 0.8 * (0.5 + std::sqrt(3.0) / 2.0)) / 2.0;
  CHECK(mixed.f_reported == doctest::Approx(expected).epsilon(1e-9));
  CHECK(mixed.false_positive);
}

}  // TEST_SUITE
