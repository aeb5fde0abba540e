// Run orchestration: configuration, counts simulation and ingest, artifact
// emission, reference-table aggregation, and independent re-verification
// of a finished output directory.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qcert/bell.hpp"
#include "qcert/certify.hpp"
#include "qcert/qsim.hpp"
#include "qcert/tomo.hpp"

namespace qcert::pipeline {

enum class SourceMode { simulate, ingest };

struct RunConfig {
  SourceMode mode = SourceMode::simulate;
  std::string in_dir;              // ingest mode: holds counts_<theta>.json
  std::vector<double> theta_deg = {30.0, 32.5, 35.0, 37.5, 40.0, 42.5, 45.0};
  std::uint64_t trials = 1000000;  // per setting and per tomography basis
  bool infinite_sample = false;    // exact Born statistics, no sampling
  qsim::CountingMode counting = qsim::CountingMode::multinomial;
  qsim::NoiseModel noise;
  std::uint64_t seed = 1;          // per-theta streams derive from this
  double tol = 1e-7;               // fidelity-stage relative gap target
  double known_slack = 1e-6;       // correlator interval half-width
  std::vector<double> eps_grid;    // robustness curve; empty = skip
  std::string out_dir = "out";
  int workers = 1;

  void validate() const;  // theta in (0, 45], trials >= 1, workers >= 1, ...
};

// Flat "key = value" file, one pair per line, '#' starts a comment.
// Unknown keys throw ValidationError naming the key.
RunConfig config_from_file(const std::string& path);
void apply_config_kv(RunConfig& cfg, const std::string& key,
                     const std::string& value);

// One experiment's raw data: the four Bell settings plus nine
// tomography bases, sampled or ingested together.
struct CountsBundle {
  bell::CountsRecord selftest;
  tomo::TomoCounts tomo;
};

// theta_index offsets the RNG seed so every grid point draws from its own
// streams; run() passes the position of theta_deg in cfg.theta_deg.
CountsBundle simulate_counts(const RunConfig& cfg, double theta_deg,
                             std::size_t theta_index = 0);
std::string counts_to_json(const CountsBundle& b);
// Parses and validates; for multinomial counting every setting/basis total
// must equal the declared trials_per_setting.
CountsBundle counts_from_json(const std::string& text);

struct ThetaResult {
  double theta_deg = 0.0;
  // Violation diagnostics computed from the raw frequencies.
  double i_value = 0.0;
  double i_stderr = 0.0;  // binomial plug-in; 0 for infinite-sample runs
  double local_bound = 0.0;
  double quantum_max = 0.0;
  double a0_given_y0 = 0.0;  // Alice's first-setting marginal, per Bob input
  double a0_given_y1 = 0.0;
  certify::PipelineResult pipe;  // regularization + certified bound
  double f_t = 0.0;              // tomographic fidelity
  std::vector<certify::RobustPoint> curve;  // per cfg.eps_grid
};

// Finite-sample path: counts -> frequencies -> both fidelity estimates.
ThetaResult process_counts(const RunConfig& cfg, const CountsBundle& b);
// Infinite-sample path: exact Born behavior and exact expectations.
ThetaResult process_exact(const RunConfig& cfg, double theta_deg);

struct ReferenceRow {
  double theta_deg = 0.0;
  double f_t = 0.0;
  double f_s = 0.0;
};

struct Aggregates {
  double mean_ratio_all = 0.0;
  double mean_ratio_high_theta = 0.0;  // rows with theta >= 35 degrees
};

// CSV with header theta_deg,f_t,f_s.
std::vector<ReferenceRow> reference_from_csv(const std::string& path);
Aggregates aggregate_ratios(const std::vector<ReferenceRow>& rows);
// Exact-rational check that the mean of f_s/f_t over rows with
// theta_deg >= min_theta rounds to millis/1000 (entries are read as exact
// multiples of 1e-3).
bool mean_ratio_rounds_to(const std::vector<ReferenceRow>& rows,
                          double min_theta, int millis);

struct RunResult {
  std::vector<ThetaResult> per_theta;
  Aggregates aggregates;
};

// Full pipeline over cfg.theta_deg with a bounded worker pool; writes the
// artifact set into cfg.out_dir: per-theta counts_*.json (finite-sample
// runs), nqa2_*.json and cert_*.json, plus fidelities.csv, violation.csv,
// robust_curves.csv (when eps_grid is set), report.csv and report.json.
// Artifacts are deterministic byte-for-byte for a fixed config.
RunResult run(const RunConfig& cfg);

// Re-checks a finished out_dir from its artifacts alone: tomographic
// fidelity re-derived from counts, no-signaling and moment-matrix PSD of
// the regularized behavior, distance-to-frequencies against the stored s,
// certificate re-evaluation of the stored dual against a freshly built
// problem, and the report aggregates. Prints one line per check to `out`;
// returns the number of failed checks.
int verify_run(const std::string& dir, std::ostream& out);

}  // namespace qcert::pipeline
