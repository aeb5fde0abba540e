// Behavior and tilted-CHSH tests: correlator round trips, no-signaling
// diagnostics, the inequality's bounds, and the theta parameterization.

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "qcert/bell.hpp"
#include "qcert/errors.hpp"
#include "qcert/qsim.hpp"
#include "qcert/rng.hpp"

using namespace qcert;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

bell::Behavior born_at(double theta, double p = 1.0) {
  auto rho = qsim::apply_depolarizing(
      qsim::density_from_pure(qsim::target_state(theta)), p);
  return qsim::born_behavior(rho, qsim::ideal_measurements(theta));
}

}  // namespace

TEST_SUITE("bell") {

TEST_CASE("behavior indexing and validation") {
  bell::Behavior b;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int ia = 0; ia < 2; ++ia)
        for (int ib = 0; ib < 2; ++ib) b.at(x, y, ia, ib) = 0.25;
  b.validate();

  b.at(0, 0, 0, 0) = 0.5;  // setting (0,0) now sums to 1.25
  CHECK_THROWS_AS(b.validate(), ValidationError);
}

TEST_CASE("correlator round trip on quantum behaviors") {
  rng::Xoshiro256pp g(17);
  for (int trial = 0; trial < 20; ++trial) {
    double theta = (10.0 + 35.0 * g.uniform()) * kDeg;
    double p = 0.7 + 0.3 * g.uniform();
    auto b = born_at(theta, p);
    auto c = bell::to_correlators(b);
    auto b2 = bell::from_correlators(c);
    for (int k = 0; k < 16; ++k)
      CHECK(b.p[k] == doctest::Approx(b2.p[k]).epsilon(1e-12));
  }
}

TEST_CASE("from_correlators rejects out-of-range values") {
  bell::CorrelatorForm c{};
  c.corr[0][0] = 1.5;
  CHECK_THROWS_AS(bell::from_correlators(c), ValidationError);
}

TEST_CASE("counts to frequencies") {
  bell::CountsRecord counts;
  counts.trials_per_setting = 100;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      counts.n[bell::Behavior::index(x, y, 0, 0)] = 40;
      counts.n[bell::Behavior::index(x, y, 0, 1)] = 10;
      counts.n[bell::Behavior::index(x, y, 1, 0)] = 10;
      counts.n[bell::Behavior::index(x, y, 1, 1)] = 40;
    }
  CHECK(counts.setting_total(0, 1) == 100);
  auto b = bell::behavior_from_counts(counts);
  b.validate();
  CHECK(b.at(0, 0, 0, 0) == doctest::Approx(0.4));
  auto c = bell::to_correlators(b);
  CHECK(c.corr[0][0] == doctest::Approx(0.6));
  CHECK(c.mA[0] == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("tilted-CHSH bounds and the theta parameterization") {
  for (double td : {10.0, 20.0, 30.0, 37.5, 45.0}) {
    double theta = td * kDeg;
    double alpha = bell::alpha_for_theta(theta);
    // alpha(theta) = 2 / sqrt(1 + 2 tan^2(2 theta))
    double t = std::tan(2.0 * theta);
    CHECK(alpha == doctest::Approx(2.0 / std::sqrt(1.0 + 2.0 * t * t))
                       .epsilon(1e-12));
    CHECK(bell::local_bound(alpha) == doctest::Approx(2.0 + alpha));
    CHECK(bell::quantum_max(alpha) ==
          doctest::Approx(std::sqrt(8.0 + 2.0 * alpha * alpha)));
    // mu = arctan(sin 2 theta)
    CHECK(std::tan(bell::mu_for_theta(theta)) ==
          doctest::Approx(std::sin(2.0 * theta)).epsilon(1e-12));
  }
  // Maximal entanglement recovers plain CHSH.
  CHECK(bell::alpha_for_theta(45.0 * kDeg) == doctest::Approx(0.0).scale(1.0));
  CHECK_THROWS_AS(bell::alpha_for_theta(0.0), ValidationError);
}

TEST_CASE("ideal behavior attains the quantum maximum") {
  for (double td : {30.0, 37.5, 45.0}) {
    double theta = td * kDeg;
    double alpha = bell::alpha_for_theta(theta);
    double i_val = bell::tilted_chsh(bell::to_correlators(born_at(theta)), alpha);
    CHECK(i_val == doctest::Approx(bell::quantum_max(alpha)).epsilon(1e-12));
    CHECK(bell::epsilon_deviation(i_val, alpha) ==
          doctest::Approx(0.0).scale(1.0));
    CHECK(i_val > bell::local_bound(alpha));
  }
}

TEST_CASE("depolarizing scales the violation below maximal") {
  double theta = 40.0 * kDeg;
  double alpha = bell::alpha_for_theta(theta);
  double ideal = bell::tilted_chsh(bell::to_correlators(born_at(theta)), alpha);
  double noisy = bell::tilted_chsh(bell::to_correlators(born_at(theta, 0.9)), alpha);
  CHECK(noisy < ideal);
  CHECK(bell::epsilon_deviation(noisy, alpha) > 0.0);
}

TEST_CASE("signaling deficit is zero on quantum behaviors") {
  for (double td : {30.0, 45.0}) {
    auto rep = bell::signaling_deficit(born_at(td * kDeg, 0.95));
    CHECK(rep.max_deficit < 1e-14);
    // Marginals agree across the partner's settings.
    CHECK(rep.mA_by_y[0][0] == doctest::Approx(rep.mA_by_y[0][1]).epsilon(1e-12));
  }
}

TEST_CASE("signaling deficit detects a leaked marginal") {
  auto b = born_at(45.0 * kDeg);
  // Shift probability within setting (0,1) only: Alice's marginal at x=0 now
  // depends on Bob's input.
  double d = 0.02;
  b.at(0, 1, 0, 0) += d;
  b.at(0, 1, 1, 0) -= d;
  b.validate();
  auto rep = bell::signaling_deficit(b);
  CHECK(rep.max_deficit == doctest::Approx(2.0 * d).epsilon(1e-9));
  CHECK(rep.deficit_A[0] > 0.0);
}

}  // TEST_SUITE
