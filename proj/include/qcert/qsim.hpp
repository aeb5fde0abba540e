#pragma once
// Exact quantum ground truth for the two-qubit source: target states,
// ideal and perturbed x-z plane measurements, Born-rule behaviors, and
// finite-sample count generation with a portable seeded RNG.

#include <array>
#include <cstdint>

#include "qcert/bell.hpp"
#include "qcert/linalg.hpp"

namespace qcert::qsim {

using linalg::CMat;
using linalg::cplx;

// Pauli matrices (2x2); which is one of 'i', 'x', 'y', 'z'.
CMat pauli(char which);

// |psi(theta)> = cos(theta)|00> + sin(theta)|11>, basis |00>,|01>,|10>,|11>
struct PureState {
  std::array<cplx, 4> amp{};
  void validate() const;  // unit norm within 1e-12
};

PureState target_state(double theta);  // radians, theta in (0, pi/4]

struct DensityMatrix {
  CMat m;  // 4x4 (2x2 for the single-qubit demo path)
  // Hermitian within 1e-12, trace 1 within 1e-12, eigenvalues >= -1e-10
  void validate() const;
};

DensityMatrix density_from_pure(const PureState& psi);

// p*rho + (1-p) * I/dim
DensityMatrix apply_depolarizing(const DensityMatrix& rho, double p);

enum class Party { A, B };

// A +-1 observable in the x-z plane: cos(angle) sigma_z + sin(angle) sigma_x.
struct MeasurementSetting {
  Party party{};
  int index = 0;  // 0 or 1
  double angle = 0.0;
};

CMat observable(const MeasurementSetting& s);  // 2x2 Hermitian involution

struct SettingSet {
  std::array<MeasurementSetting, 2> a;  // A0, A1
  std::array<MeasurementSetting, 2> b;  // B0, B1
};

// A0 = sigma_z, A1 = sigma_x, B0/B1 at angles +-mu(theta).
SettingSet ideal_measurements(double theta);

struct NoiseModel {
  double depolarizing_p = 1.0;             // state mixing weight
  std::array<double, 2> a_offset{0.0, 0.0};  // per-setting angle offsets (rad)
  std::array<double, 2> b_offset{0.0, 0.0};
  double global_rotation = 0.0;            // common miscalibration xi (rad)
};

// Shift every measurement angle by its offset plus the global rotation.
SettingSet apply_noise(const SettingSet& s, const NoiseModel& noise);

// P(a,b|x,y) = Tr[rho (Pi_a^x ⊗ Pi_b^y)] — exactly no-signaling.
bell::Behavior born_behavior(const DensityMatrix& rho, const SettingSet& s);

enum class CountingMode { multinomial, poisson };

struct TrialPlan {
  std::uint64_t trials_per_setting = 1;
  CountingMode mode = CountingMode::multinomial;
  std::uint64_t seed = 0;
};

// RNG stream tags: Bell setting (x,y) draws from stream 2x+y; the
// tomography sampler (tomo module) uses streams 16..24. Per-setting draws
// are therefore independent of evaluation order.
constexpr std::uint64_t kBellStreamBase = 0;
constexpr std::uint64_t kTomoStreamBase = 16;

bell::CountsRecord sample_counts(const bell::Behavior& b, const TrialPlan& plan,
                                 double theta_deg = 0.0);

// <psi| rho |psi>
double fidelity_pure(const DensityMatrix& rho, const PureState& psi);

}  // namespace qcert::qsim
