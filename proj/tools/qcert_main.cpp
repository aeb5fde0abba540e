// Command-line driver: simulate counts, certify single experiments, run the
// full report pipeline, emit robustness curves, demo tomography
// miscalibration, and re-verify emitted artifact directories.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "qcert/errors.hpp"
#include "qcert/pipeline.hpp"

namespace {

namespace fs = std::filesystem;
using namespace qcert;

constexpr double kDegToRad = std::numbers::pi / 180.0;

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << text;
}

std::string theta_tag(double theta_deg) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", theta_deg);
  return buf;
}

// Flags shared by subcommands that build a RunConfig. Values are kept as
// raw strings and replayed through apply_config_kv so the flag grammar and
// the config-file grammar stay identical.
struct ConfigFlags {
  std::string config;
  std::vector<std::pair<std::string, std::string>> overrides;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--config", config, "flat key = value config file");
    auto capture = [this](const std::string& key) {
      return [this, key](const std::string& v) {
        overrides.emplace_back(key, v);
        return true;
      };
    };
    auto opt = [&](const char* flag, const char* key, const char* desc) {
      cmd->add_option_function<std::string>(flag, capture(key), desc);
    };
    opt("--mode", "mode", "simulate|ingest");
    opt("--in-dir", "in_dir", "ingest: directory with counts files");
    opt("--theta", "theta", "comma list of theta (degrees)");
    opt("--trials", "trials", "trials per setting and basis");
    opt("--seed", "seed", "base RNG seed");
    opt("--counting", "counting", "multinomial|poisson");
    cmd->add_flag(
        "--infinite-sample",
        std::function<void(std::int64_t)>(
            [cap = capture("infinite_sample")](std::int64_t) { cap("true"); }),
        "exact Born statistics, no sampling");
    opt("--depolarizing-p", "depolarizing_p", "depolarizing survival probability");
    opt("--eps-grid", "eps_grid", "comma list of deviation radii");
    opt("--tol", "tol", "solver relative gap target");
    opt("--known-slack", "known_slack", "correlator interval half-width");
    opt("--out", "out_dir", "output directory");
    opt("--workers", "workers", "worker pool size");
  }

  pipeline::RunConfig resolve() const {
    pipeline::RunConfig cfg;
    if (!config.empty()) cfg = pipeline::config_from_file(config);
    for (const auto& [k, v] : overrides) pipeline::apply_config_kv(cfg, k, v);
    return cfg;
  }
};

int cmd_simulate(const ConfigFlags& flags) {
  pipeline::RunConfig cfg = flags.resolve();
  cfg.validate();
  if (cfg.mode != pipeline::SourceMode::simulate)
    throw ValidationError("simulate subcommand requires mode=simulate");
  fs::create_directories(cfg.out_dir);
  for (std::size_t i = 0; i < cfg.theta_deg.size(); ++i) {
    auto b = pipeline::simulate_counts(cfg, cfg.theta_deg[i], i);
    fs::path dst = fs::path(cfg.out_dir) /
                   ("counts_" + theta_tag(cfg.theta_deg[i]) + ".json");
    write_text(dst.string(), pipeline::counts_to_json(b));
    std::printf("wrote %s\n", dst.string().c_str());
  }
  return 0;
}

void print_theta_summary(const pipeline::ThetaResult& r) {
  std::printf("theta %g deg\n", r.theta_deg);
  std::printf("  tilted-CHSH value   %.6f", r.i_value);
  if (r.i_stderr > 0.0) std::printf(" +- %.6f", r.i_stderr);
  std::printf("  (local bound %.6f, quantum max %.6f)\n", r.local_bound,
              r.quantum_max);
  std::printf("  signaling deficit   raw %.3e -> regularized %.3e\n",
              r.pipe.raw_signaling.max_deficit,
              r.pipe.regularized_signaling.max_deficit);
  std::printf("  NQA2 distance s     %.6e\n", r.pipe.nqa2.s);
  std::printf("  tomographic   f_t   %.6f\n", r.f_t);
  std::printf("  self-testing  f_s   %.6f  (ratio %.4f, penalty %.2e, %s, %d iters)\n",
              r.pipe.cert.f_s, r.pipe.cert.f_s / r.f_t,
              r.pipe.cert.certificate_penalty,
              sdp::to_string(r.pipe.cert.diag.status), r.pipe.cert.diag.iterations);
  for (const auto& pt : r.curve)
    std::printf("  robust f_s at eps=%g: %.6f\n", pt.epsilon, pt.f_s);
}

int cmd_certify(const ConfigFlags& flags, const std::string& counts_path) {
  pipeline::RunConfig cfg = flags.resolve();
  auto bundle = pipeline::counts_from_json(read_text(counts_path));
  print_theta_summary(pipeline::process_counts(cfg, bundle));
  return 0;
}

int cmd_tomo(const std::string& counts_path) {
  auto bundle = pipeline::counts_from_json(read_text(counts_path));
  double theta = bundle.tomo.theta_deg * kDegToRad;
  double f_t = tomo::fidelity_from_counts(bundle.tomo, theta);
  std::printf("theta %g deg\n", bundle.tomo.theta_deg);
  std::printf("  tomographic f_t = %.9f\n", f_t);
  return 0;
}

int cmd_curve(const ConfigFlags& flags) {
  pipeline::RunConfig cfg = flags.resolve();
  cfg.validate();
  if (cfg.eps_grid.empty())
    throw ValidationError("curve subcommand requires --eps-grid");
  certify::CertifyOptions copt;
  copt.tol = cfg.tol;
  copt.known_slack = cfg.known_slack;
  std::string csv = "theta_deg,epsilon,f_s\n";
  char buf[128];
  for (double td : cfg.theta_deg) {
    auto curve = certify::robust_curve(td * kDegToRad, cfg.eps_grid, copt);
    for (const auto& pt : curve) {
      std::snprintf(buf, sizeof buf, "%g,%g,%.9f\n", td, pt.epsilon, pt.f_s);
      csv += buf;
    }
  }
  fs::create_directories(cfg.out_dir);
  fs::path dst = fs::path(cfg.out_dir) / "robust_curves.csv";
  write_text(dst.string(), csv);
  std::printf("%s", csv.c_str());
  std::printf("wrote %s\n", dst.string().c_str());
  return 0;
}

int cmd_report(const ConfigFlags& flags, const std::string& reference) {
  if (!reference.empty()) {
    auto rows = pipeline::reference_from_csv(reference);
    auto agg = pipeline::aggregate_ratios(rows);
    std::printf("reference table: %zu rows\n", rows.size());
    for (const auto& r : rows)
      std::printf("  theta %5.1f  f_t %.3f  f_s %.3f  ratio %.4f\n", r.theta_deg,
                  r.f_t, r.f_s, r.f_s / r.f_t);
    std::printf("mean ratio (all)         %.3f\n", agg.mean_ratio_all);
    std::printf("mean ratio (theta>=35)   %.3f\n", agg.mean_ratio_high_theta);
    return 0;
  }

  pipeline::RunConfig cfg = flags.resolve();
  auto res = pipeline::run(cfg);
  std::printf("%-9s %-10s %-10s %-10s %-8s %-10s %s\n", "theta", "I", "f_t",
              "f_s", "ratio", "nqa2_s", "status");
  for (const auto& r : res.per_theta)
    std::printf("%-9g %-10.6f %-10.6f %-10.6f %-8.4f %-10.3e %s\n", r.theta_deg,
                r.i_value, r.f_t, r.pipe.cert.f_s, r.pipe.cert.f_s / r.f_t,
                r.pipe.nqa2.s, sdp::to_string(r.pipe.cert.diag.status));
  std::printf("mean ratio (all)         %.4f\n", res.aggregates.mean_ratio_all);
  std::printf("mean ratio (theta>=35)   %.4f\n",
              res.aggregates.mean_ratio_high_theta);
  std::printf("artifacts in %s\n", cfg.out_dir.c_str());
  return 0;
}

int cmd_demo_miscalibration(double p, double xi_deg) {
  auto demo = tomo::miscalibration_demo(p, xi_deg * kDegToRad);
  std::printf("depolarizing survival p  %.4f\n", demo.p);
  std::printf("analyzer rotation xi     %g deg\n", xi_deg);
  std::printf("true fidelity            %.6f\n", demo.f_true);
  std::printf("reported fidelity        %.6f\n", demo.f_reported);
  if (demo.false_positive)
    std::printf("false positive: reported fidelity exceeds 1\n");
  else if (demo.f_reported > demo.f_true)
    std::printf("reported fidelity inflated above the true value\n");
  else
    std::printf("no false positive\n");
  return 0;
}

int cmd_verify(const std::string& dir) {
  return pipeline::verify_run(dir, std::cout) == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-qubit source certification: tomography vs self-testing"};
  app.require_subcommand(1);

  ConfigFlags sim_flags, cert_flags, curve_flags, report_flags;
  std::string certify_in, tomo_in, verify_in, reference;
  double demo_p = 1.0, demo_xi = 45.0;

  auto* sim = app.add_subcommand("simulate", "sample counts files for a theta grid");
  sim_flags.add_to(sim);

  auto* cert = app.add_subcommand("certify", "run both pipelines on one counts file");
  cert->add_option("--in", certify_in, "counts JSON file")->required();
  cert_flags.add_to(cert);

  auto* tom = app.add_subcommand("tomo", "tomographic fidelity from one counts file");
  tom->add_option("--in", tomo_in, "counts JSON file")->required();

  auto* cur = app.add_subcommand("curve", "certified fidelity vs deviation radius");
  curve_flags.add_to(cur);

  auto* rep = app.add_subcommand("report", "full grid run with artifacts");
  rep->add_option("--reference", reference,
                  "aggregate a reference fidelity table instead of running");
  report_flags.add_to(rep);

  auto* demo = app.add_subcommand("demo-miscalibration",
                                  "tomography false positive under miscalibration");
  demo->add_option("--p", demo_p, "depolarizing survival probability");
  demo->add_option("--xi-deg", demo_xi, "analyzer rotation (degrees)");

  auto* ver = app.add_subcommand("verify", "re-derive and check an artifact directory");
  ver->add_option("--in", verify_in, "artifact directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_flags);
    if (cert->parsed()) return cmd_certify(cert_flags, certify_in);
    if (tom->parsed()) return cmd_tomo(tomo_in);
    if (cur->parsed()) return cmd_curve(curve_flags);
    if (rep->parsed()) return cmd_report(report_flags, reference);
    if (demo->parsed()) return cmd_demo_miscalibration(demo_p, demo_xi);
    if (ver->parsed()) return cmd_verify(verify_in);
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const SolverError& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 1;
  }
  return 0;
}
