#include "qcert/bell.hpp"

#include <cmath>
#include <numbers>

#include "qcert/errors.hpp"

namespace qcert::bell {

namespace {
constexpr double kQuarterPi = std::numbers::pi / 4.0;
// outcome value for index 0/1
constexpr double outcome(int idx) { return idx == 0 ? 1.0 : -1.0; }
}  // namespace

void Behavior::validate() const {
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      double sum = 0.0;
      for (int ia = 0; ia < 2; ++ia)
        for (int ib = 0; ib < 2; ++ib) {
          const double v = at(x, y, ia, ib);
          if (v < -1e-9 || v > 1.0 + 1e-9)
            throw ValidationError("behavior entry out of [0,1] at (x=" +
                                  std::to_string(x) + ",y=" + std::to_string(y) + ")");
          sum += v;
        }
      if (std::fabs(sum - 1.0) > 1e-12)
        throw ValidationError("behavior columns for (x=" + std::to_string(x) +
                              ",y=" + std::to_string(y) + ") sum to " + std::to_string(sum));
    }
}

std::uint64_t CountsRecord::setting_total(int x, int y) const {
  std::uint64_t t = 0;
  for (int ia = 0; ia < 2; ++ia)
    for (int ib = 0; ib < 2; ++ib) t += n[Behavior::index(x, y, ia, ib)];
  return t;
}

Behavior behavior_from_counts(const CountsRecord& counts) {
  Behavior b;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      const std::uint64_t total = counts.setting_total(x, y);
      if (total == 0)
        throw ValidationError("empty setting (x=" + std::to_string(x) +
                              ",y=" + std::to_string(y) + "): zero total count");
      for (int ia = 0; ia < 2; ++ia)
        for (int ib = 0; ib < 2; ++ib)
          b.at(x, y, ia, ib) =
              static_cast<double>(counts.n[Behavior::index(x, y, ia, ib)]) /
              static_cast<double>(total);
    }
  return b;
}

CorrelatorForm to_correlators(const Behavior& b) {
  CorrelatorForm c;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      double e = 0.0;
      for (int ia = 0; ia < 2; ++ia)
        for (int ib = 0; ib < 2; ++ib)
          e += outcome(ia) * outcome(ib) * b.at(x, y, ia, ib);
      c.corr[x][y] = e;
    }
  const SignalingReport r = signaling_deficit(b);
  for (int x = 0; x < 2; ++x) c.mA[x] = 0.5 * (r.mA_by_y[x][0] + r.mA_by_y[x][1]);
  for (int y = 0; y < 2; ++y) c.mB[y] = 0.5 * (r.mB_by_x[y][0] + r.mB_by_x[y][1]);
  return c;
}

Behavior from_correlators(const CorrelatorForm& c) {
  Behavior b;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int ia = 0; ia < 2; ++ia)
        for (int ib = 0; ib < 2; ++ib) {
          const double a = outcome(ia), bb = outcome(ib);
          const double p =
              0.25 * (1.0 + a * c.mA[x] + bb * c.mB[y] + a * bb * c.corr[x][y]);
          if (p < -1e-9)
            throw ValidationError(
                "correlator form implies negative probability at (a=" +
                std::to_string(static_cast<int>(a)) + ",b=" +
                std::to_string(static_cast<int>(bb)) + ",x=" + std::to_string(x) +
                ",y=" + std::to_string(y) + "): " + std::to_string(p));
          b.at(x, y, ia, ib) = p;
        }
  return b;
}

SignalingReport signaling_deficit(const Behavior& b) {
  SignalingReport r;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      double ma = 0.0, mb = 0.0;
      for (int ia = 0; ia < 2; ++ia)
        for (int ib = 0; ib < 2; ++ib) {
          ma += outcome(ia) * b.at(x, y, ia, ib);
          mb += outcome(ib) * b.at(x, y, ia, ib);
        }
      r.mA_by_y[x][y] = ma;
      r.mB_by_x[y][x] = mb;
    }
  for (int x = 0; x < 2; ++x)
    r.deficit_A[x] = std::fabs(r.mA_by_y[x][0] - r.mA_by_y[x][1]);
  for (int y = 0; y < 2; ++y)
    r.deficit_B[y] = std::fabs(r.mB_by_x[y][0] - r.mB_by_x[y][1]);
  r.max_deficit = std::max(std::max(r.deficit_A[0], r.deficit_A[1]),
                           std::max(r.deficit_B[0], r.deficit_B[1]));
  return r;
}

double tilted_chsh(const CorrelatorForm& c, double alpha) {
  if (alpha < 0.0 || alpha >= 2.0)
    throw ValidationError("tilted_chsh: alpha must lie in [0,2)");
  return alpha * c.mA[0] + c.corr[0][0] + c.corr[0][1] + c.corr[1][0] - c.corr[1][1];
}

double local_bound(double alpha) { return 2.0 + alpha; }

double quantum_max(double alpha) { return std::sqrt(8.0 + 2.0 * alpha * alpha); }

double alpha_for_theta(double theta) {
  if (!(theta > 0.0) || theta > kQuarterPi + 1e-12)
    throw ValidationError("alpha_for_theta: theta outside (0, pi/4]");
  if (std::fabs(theta - kQuarterPi) < 1e-12) return 0.0;  // tan(pi/2) limit
  const double t = std::tan(2.0 * theta);
  return 2.0 / std::sqrt(1.0 + 2.0 * t * t);
}

double mu_for_theta(double theta) {
  if (!(theta > 0.0) || theta > kQuarterPi + 1e-12)
    throw ValidationError("mu_for_theta: theta outside (0, pi/4]");
  return std::atan(std::sin(2.0 * theta));
}

double epsilon_deviation(double value, double alpha) {
  return quantum_max(alpha) - value;
}

}  // namespace qcert::bell
