#pragma once
// Two-qubit state tomography: Pauli expectation estimation from 9 local
// measurement bases, linear inversion, projection onto physical states,
// fidelity against the target, and a single-qubit miscalibration demo
// showing how calibration errors inflate reported fidelity.

#include <array>
#include <cstdint>
#include <string>

#include "qcert/linalg.hpp"
#include "qcert/qsim.hpp"

namespace qcert::tomo {

// e[i][j] = <sigma_i ⊗ sigma_j> with index 0 = identity, 1,2,3 = x,y,z.
// e[0][0] is fixed to 1.
struct PauliExpectations {
  std::array<std::array<double, 4>, 4> e{};

  // |entries| <= 1 + 1e-9 and e[0][0] == 1
  void validate() const;
};

// Measurement bases in fixed order; basis index k = 3*(iA-1) + (iB-1)
// for Pauli indices iA, iB in {1,2,3}.
inline constexpr std::array<const char*, 9> kBases = {
    "xx", "xy", "xz", "yx", "yy", "yz", "zx", "zy", "zz"};

int basis_index(const std::string& basis);  // throws on unknown label

// Coincidence counts for the 9 tomography settings. Outcome layout per
// basis: 2*ia + ib with index 0 encoding outcome +1 (as in bell::Behavior).
struct TomoCounts {
  double theta_deg = 0.0;  // metadata only
  std::uint64_t trials_per_setting = 0;
  std::string counting_mode = "multinomial";
  std::uint64_t seed = 0;
  bool has_seed = false;
  std::array<std::array<std::uint64_t, 4>, 9> n{};

  std::uint64_t basis_total(int k) const;
};

PauliExpectations expectations_from_state(const qsim::DensityMatrix& rho);

// Finite-sample counts in each basis; RNG stream for basis k is
// qsim::kTomoStreamBase + k, so Bell and tomography draws never collide.
TomoCounts sample_tomo_counts(const qsim::DensityMatrix& rho,
                              const qsim::TrialPlan& plan,
                              double theta_deg = 0.0);

// Joint terms from the matching basis; single-party terms from marginals
// averaged uniformly over the partner's three bases. Throws on an empty
// basis, naming it.
PauliExpectations expectations_from_counts(const TomoCounts& counts);

// rho' = (1/4) sum_ij e[i][j] sigma_i ⊗ sigma_j — Hermitian, unit trace,
// possibly non-positive.
linalg::CMat linear_inversion(const PauliExpectations& e);

// Frobenius-nearest density matrix: eigenvalue simplex projection.
qsim::DensityMatrix project_to_physical(const linalg::CMat& raw);

// Full pipeline: counts -> expectations -> inversion -> projection ->
// <psi(theta)| rho |psi(theta)>. Theta in radians.
double fidelity_from_counts(const TomoCounts& counts, double theta);

// Infinite-sample variant operating on exact expectations.
double fidelity_from_expectations(const PauliExpectations& e, double theta);

// Single-qubit calibration-error demonstration: the source emits
// p |phi><phi| + (1-p) I/2 with |phi> = cos(pi/8)|0> + sin(pi/8)|1>, but
// the analyzer axes are rotated by xi in the x-z plane. Linear inversion
// then misreports the fidelity, and can exceed 1.
struct MiscalibrationDemo {
  double p = 1.0;
  double xi = 0.0;
  double f_true = 0.0;      // fidelity of the emitted state
  double f_reported = 0.0;  // fidelity of the naive reconstruction
  bool false_positive = false;  // f_reported > 1
};

MiscalibrationDemo miscalibration_demo(double p, double xi);

}  // namespace qcert::tomo
