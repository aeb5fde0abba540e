// Certification stage tests: NQA2 regularization, the fidelity program and
// its certificate, robustness curves, and the end-to-end pipeline.

#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "qcert/certify.hpp"
#include "qcert/errors.hpp"

using namespace qcert;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

bell::Behavior born_at(double theta, double p = 1.0) {
  auto rho = qsim::apply_depolarizing(
      qsim::density_from_pure(qsim::target_state(theta)), p);
  return qsim::born_behavior(rho, qsim::ideal_measurements(theta));
}

}  // namespace

TEST_SUITE("certify") {

TEST_CASE("regularizing quantum data is a near no-op") {
  double theta = 37.5 * kDeg;
  auto b = born_at(theta, 0.97);
  auto r = certify::nqa2_regularize(b);
  CHECK(r.s <= 1e-6);
  for (int k = 0; k < 16; ++k)
    CHECK(std::abs(r.regularized.p[k] - b.p[k]) <= 1e-6);
  CHECK(bell::signaling_deficit(r.regularized).max_deficit <= 1e-9);
  CHECK(r.moment_vector[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("regularization removes signaling and is idempotent") {
  double theta = 45.0 * kDeg;
  auto b = born_at(theta);
  // Inject signaling: Alice's x=0 marginal leaks Bob's setting.
  b.at(0, 0, 0, 0) += 0.02;
  b.at(0, 0, 1, 0) -= 0.02;
  b.validate();
  REQUIRE(bell::signaling_deficit(b).max_deficit > 0.01);

  auto r = certify::nqa2_regularize(b);
  CHECK(bell::signaling_deficit(r.regularized).max_deficit <= 1e-7);
  CHECK(r.s > 0.0);
  CHECK(r.s <= 0.08);  // no farther than a few times the injected distance

  // The distance bound holds: ||regularized - input||_2 <= s.
  double dist2 = 0.0;
  for (int k = 0; k < 16; ++k) {
    double d = r.regularized.p[k] - b.p[k];
    dist2 += d * d;
  }
  CHECK(std::sqrt(dist2) <= r.s + 1e-7);

  auto again = certify::nqa2_regularize(r.regularized);
  CHECK(again.s <= 1e-6);
}

TEST_CASE("fidelity program is well formed") {
  double theta = 45.0 * kDeg;
  auto c = bell::to_correlators(born_at(theta));
  auto p = certify::build_swap_problem(c, theta);
  p.validate();
  // Every variable carries a declared bound so certificates can always be
  // repaired.
  REQUIRE(static_cast<int>(p.var_bound.size()) == p.nvars);
  for (double b : p.var_bound) CHECK(b > 0.0);

  CHECK_THROWS_AS(certify::build_swap_problem(c, theta, 0.0), ValidationError);
  CHECK_THROWS_AS(certify::build_swap_problem(c, 0.0), ValidationError);
}

TEST_CASE("epsilon variant floors tiny deviations") {
  double theta = 40.0 * kDeg;
  std::ostringstream d0, d1;
  sdp::write_sparse_dump(certify::build_swap_problem_eps(theta, 0.0), d0);
  sdp::write_sparse_dump(certify::build_swap_problem_eps(theta, 1e-6), d1);
  CHECK(d0.str() == d1.str());
}

TEST_CASE("ideal correlators certify fidelity near one") {
  double theta = 45.0 * kDeg;
  auto cert = certify::swap_fidelity(bell::to_correlators(born_at(theta)), theta);
  CHECK(cert.certificate_valid);
  CHECK(cert.f_s >= 0.9999);
  CHECK(cert.f_s <= 1.0 + 1e-9);
  CHECK(cert.certificate_penalty < 1e-5);
  CHECK(cert.f_s == doctest::Approx(std::max(0.0, cert.certificate_value)));
  // The certificate never exceeds the primal value it bounds.
  CHECK(cert.certificate_value <= cert.primal_objective + 1e-9);
  CHECK(cert.source == certify::BoundSource::behavior_constrained);
}

TEST_CASE("certified bound stays below the tomographic value on noisy states") {
  double theta = 45.0 * kDeg;
  double p = 0.99;
  auto cert = certify::swap_fidelity(bell::to_correlators(born_at(theta, p)), theta);
  double f_t = p + (1.0 - p) / 4.0;
  CHECK(cert.certificate_valid);
  CHECK(cert.f_s <= f_t + 1e-9);
  CHECK(cert.f_s >= 0.9);
}

TEST_CASE("robustness curve is nonincreasing from near one") {
  double theta = 45.0 * kDeg;
  auto curve = certify::robust_curve(theta, {0.0, 0.1});
  REQUIRE(curve.size() == 2);
  CHECK(curve[0].epsilon == 0.0);
  CHECK(curve[0].f_s >= 0.99);
  CHECK(curve[1].f_s <= curve[0].f_s + 1e-9);
  CHECK(curve[1].f_s >= 0.0);
}

TEST_CASE("end-to-end pipeline on sampled counts") {
  double theta = 45.0 * kDeg;
  qsim::TrialPlan plan;
  plan.trials_per_setting = 500;
  plan.seed = 14;
  auto counts = qsim::sample_counts(born_at(theta), plan, 45.0);
  auto res = certify::certify_pipeline(counts, theta);

  // Finite counts signal; the regularized behavior must not.
  CHECK(res.raw_signaling.max_deficit > 0.0);
  CHECK(res.regularized_signaling.max_deficit <= 1e-7);
  CHECK(res.nqa2.s > 0.0);

  CHECK(res.cert.certificate_valid);
  CHECK(res.cert.f_s >= 0.0);
  CHECK(res.cert.f_s <= 1.0 + 1e-9);
  CHECK(res.cert.theta == doctest::Approx(theta));

  // The dual pieces stored in the certificate re-price to the same value.
  auto prob = certify::build_swap_problem(res.nqa2.correlators, theta);
  auto cb = sdp::certified_lower_bound_from_dual(prob, res.cert.dual_blocks,
                                                 res.cert.eq_multipliers);
  CHECK(cb.value == doctest::Approx(res.cert.certificate_value).epsilon(1e-10));
}

}  // TEST_SUITE
