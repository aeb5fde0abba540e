#pragma once
// Two-input/two-output bipartite boxes: behaviors P(a,b|x,y), frequency
// estimation from counts, the eight-parameter correlator form, signaling
// diagnostics, and the tilted-CHSH functional with its local and quantum
// bounds.

#include <array>
#include <cstdint>
#include <string>

namespace qcert::bell {

// Conditional probabilities P(a,b|x,y) with outcomes a,b in {+1,-1} and
// settings x,y in {0,1}. Outcome index 0 encodes +1, index 1 encodes -1.
struct Behavior {
  std::array<double, 16> p{};

  static constexpr int index(int x, int y, int ia, int ib) {
    return ((x * 2 + y) * 2 + ia) * 2 + ib;
  }
  double& at(int x, int y, int ia, int ib) { return p[index(x, y, ia, ib)]; }
  double at(int x, int y, int ia, int ib) const { return p[index(x, y, ia, ib)]; }

  // entries in [0,1] (tolerance 1e-9), each setting summing to 1 within 1e-12
  void validate() const;
};

// No-signaling parametrization: marginals <A_x>, <B_y> and correlators
// <A_x B_y>.
struct CorrelatorForm {
  std::array<double, 2> mA{};
  std::array<double, 2> mB{};
  std::array<std::array<double, 2>, 2> corr{};
};

// Raw per-setting coincidence counts for the four Bell settings.
struct CountsRecord {
  double theta_deg = 0.0;  // metadata only
  std::uint64_t trials_per_setting = 0;
  std::string counting_mode = "multinomial";  // or "poisson"
  std::uint64_t seed = 0;
  bool has_seed = false;
  std::array<std::uint64_t, 16> n{};  // Behavior::index layout

  std::uint64_t setting_total(int x, int y) const;
};

// Per-setting marginals and their mismatch across the partner's settings.
struct SignalingReport {
  std::array<std::array<double, 2>, 2> mA_by_y{};  // [x][y]
  std::array<std::array<double, 2>, 2> mB_by_x{};  // [y][x]
  std::array<double, 2> deficit_A{};
  std::array<double, 2> deficit_B{};
  double max_deficit = 0.0;
};

// Relative frequencies per setting. The result may be signaling; that is
// the point of the downstream regularization. Throws ValidationError when
// a setting has zero total, naming (x,y).
Behavior behavior_from_counts(const CountsRecord& counts);

// Marginals averaged uniformly over the partner's setting (the choice only
// matters for signaling inputs and is surfaced in SignalingReport).
CorrelatorForm to_correlators(const Behavior& b);

// p = (1 + a mA[x] + b mB[y] + ab corr[x][y]) / 4 — exactly no-signaling.
// Throws ValidationError naming (a,b,x,y) if an implied probability is
// negative beyond rounding tolerance.
Behavior from_correlators(const CorrelatorForm& c);

SignalingReport signaling_deficit(const Behavior& b);

// alpha <A0> + <A0B0> + <A0B1> + <A1B0> - <A1B1>; requires alpha in [0,2).
double tilted_chsh(const CorrelatorForm& c, double alpha);

double local_bound(double alpha);   // 2 + alpha
double quantum_max(double alpha);   // sqrt(8 + 2 alpha^2)

// alpha(theta) = 2/sqrt(1 + 2 tan^2(2 theta)) on (0, pi/4], with the
// alpha = 0 limit taken explicitly at theta = pi/4. Radians.
double alpha_for_theta(double theta);

// mu(theta) = arctan(sin 2 theta)
double mu_for_theta(double theta);

// deviation below the quantum maximum: quantum_max(alpha) - value
double epsilon_deviation(double value, double alpha);

}  // namespace qcert::bell
