// Pipeline tests: config grammar, counts serialization, seeded simulation,
// reference-table aggregation, and a small end-to-end run with artifact
// verification.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "qcert/errors.hpp"
#include "qcert/pipeline.hpp"

using namespace qcert;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream b;
  b << in.rdbuf();
  return b.str();
}

fs::path temp_dir(const char* name) {
  fs::path d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("config file grammar") {
  auto dir = temp_dir("qcert_cfg");
  auto path = dir / "run.cfg";
  {
    std::ofstream out(path);
    out << "# comment line\n"
        << "theta = 30, 45\n"
        << "trials = 5000   # inline comment\n"
        << "counting = poisson\n"
        << "depolarizing_p = 0.97\n"
        << "seed = 9\n"
        << "eps_grid = 0.0, 0.05\n"
        << "infinite_sample = false\n"
        << "out_dir = somewhere\n"
        << "workers = 2\n";
  }
  auto cfg = pipeline::config_from_file(path.string());
  CHECK(cfg.theta_deg == std::vector<double>{30.0, 45.0});
  CHECK(cfg.trials == 5000);
  CHECK(cfg.counting == qsim::CountingMode::poisson);
  CHECK(cfg.noise.depolarizing_p == doctest::Approx(0.97));
  CHECK(cfg.seed == 9);
  CHECK(cfg.eps_grid == std::vector<double>{0.0, 0.05});
  CHECK(cfg.out_dir == "somewhere");
  CHECK(cfg.workers == 2);
  cfg.validate();

  pipeline::RunConfig c2;
  CHECK_THROWS_AS(pipeline::apply_config_kv(c2, "not_a_key", "1"),
                  ValidationError);
  CHECK_THROWS_AS(pipeline::apply_config_kv(c2, "trials", "12x"),
                  ValidationError);
  CHECK_THROWS_AS(pipeline::apply_config_kv(c2, "counting", "exact"),
                  ValidationError);
}

TEST_CASE("config validation catches bad ranges") {
  pipeline::RunConfig cfg;
  cfg.theta_deg = {50.0};
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.theta_deg = {30.0, 30.0};
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.theta_deg = {30.0};
  cfg.trials = 0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.trials = 10;
  cfg.mode = pipeline::SourceMode::ingest;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);  // needs in_dir
  cfg.in_dir = "somewhere";
  cfg.validate();
}

TEST_CASE("counts serialization round trips exactly") {
  pipeline::RunConfig cfg;
  cfg.trials = 300;
  cfg.seed = 5;
  auto b = pipeline::simulate_counts(cfg, 37.5, 2);
  auto text = pipeline::counts_to_json(b);
  auto b2 = pipeline::counts_from_json(text);
  CHECK(b2.selftest.n == b.selftest.n);
  CHECK(b2.tomo.n == b.tomo.n);
  CHECK(b2.selftest.theta_deg == b.selftest.theta_deg);
  CHECK(b2.selftest.seed == b.selftest.seed);
  CHECK(pipeline::counts_to_json(b2) == text);
}

TEST_CASE("counts ingest validates structure and totals") {
  pipeline::RunConfig cfg;
  cfg.trials = 100;
  auto b = pipeline::simulate_counts(cfg, 45.0, 0);
  auto text = pipeline::counts_to_json(b);

  // A tampered total must be rejected in multinomial mode.
  auto broken = text;
  auto pos = broken.find("\"++\": ");
  REQUIRE(pos != std::string::npos);
  broken.replace(pos, 6, "\"++\": 1");
  CHECK_THROWS_AS(pipeline::counts_from_json(broken), ValidationError);

  CHECK_THROWS_AS(pipeline::counts_from_json("{}"), ValidationError);
  CHECK_THROWS_AS(pipeline::counts_from_json("not json"), ValidationError);

  // Duplicate settings are rejected even with consistent totals.
  auto dup = text;
  auto first = dup.find("\"x\": 0,");
  REQUIRE(first != std::string::npos);
  auto second = dup.find("\"x\": 1,");
  REQUIRE(second != std::string::npos);
  dup.replace(second, 7, "\"x\": 0,");
  CHECK_THROWS_AS(pipeline::counts_from_json(dup), ValidationError);
}

TEST_CASE("simulation is seeded per theta index") {
  pipeline::RunConfig cfg;
  cfg.trials = 1000;
  cfg.seed = 3;
  auto a = pipeline::simulate_counts(cfg, 45.0, 0);
  auto b = pipeline::simulate_counts(cfg, 45.0, 0);
  auto c = pipeline::simulate_counts(cfg, 45.0, 1);
  CHECK(a.selftest.n == b.selftest.n);
  CHECK(a.tomo.n == b.tomo.n);
  CHECK(a.selftest.n != c.selftest.n);
}

TEST_CASE("reference tables aggregate with exact arithmetic") {
  auto dir = temp_dir("qcert_ref");
  auto path = dir / "ref.csv";
  {
    std::ofstream out(path);
    out << "theta_deg,f_t,f_s\n"
        << "30,0.990,0.943\n"
        << "35,0.984,0.963\n"
        << "45,0.991,0.982\n";
  }
  auto rows = pipeline::reference_from_csv(path.string());
  REQUIRE(rows.size() == 3);
  auto agg = pipeline::aggregate_ratios(rows);
  double expect_all = (0.943 / 0.990 + 0.963 / 0.984 + 0.982 / 0.991) / 3.0;
  CHECK(agg.mean_ratio_all == doctest::Approx(expect_all).epsilon(1e-12));
  double expect_high = (0.963 / 0.984 + 0.982 / 0.991) / 2.0;
  CHECK(agg.mean_ratio_high_theta == doctest::Approx(expect_high).epsilon(1e-12));

  // Exact rational rounding check: the high-theta mean is 0.98487...,
  // which rounds to 0.985 and to nothing else.
  CHECK(pipeline::mean_ratio_rounds_to(rows, 35.0, 985));
  CHECK_FALSE(pipeline::mean_ratio_rounds_to(rows, 35.0, 984));
  CHECK_FALSE(pipeline::mean_ratio_rounds_to(rows, 35.0, 986));

  {
    std::ofstream out(path);
    out << "theta,f_t,f_s\n30,0.9,0.9\n";
  }
  CHECK_THROWS_AS(pipeline::reference_from_csv(path.string()), ValidationError);
}

TEST_CASE("small run emits coherent, verifiable artifacts") {
  auto dir = temp_dir("qcert_run");
  pipeline::RunConfig cfg;
  cfg.theta_deg = {45.0};
  cfg.trials = 2000;
  cfg.seed = 8;
  cfg.out_dir = dir.string();

  auto res = pipeline::run(cfg);
  REQUIRE(res.per_theta.size() == 1);
  const auto& r = res.per_theta[0];
  CHECK(r.i_value > 2.0);
  CHECK(r.i_stderr > 0.0);
  CHECK(r.f_t > 0.9);
  CHECK(r.pipe.cert.f_s > 0.5);
  CHECK(r.pipe.cert.f_s <= r.f_t + 0.1);

  for (const char* name : {"counts_45.json", "nqa2_45.json", "cert_45.json",
                           "fidelities.csv", "violation.csv", "report.csv",
                           "report.json"})
    CHECK(fs::exists(dir / name));

  // The verifier re-derives every row from the artifacts alone.
  std::ostringstream log;
  CHECK(pipeline::verify_run(dir.string(), log) == 0);

  // Re-running the same config reproduces every byte.
  auto before = slurp(dir / "report.json");
  pipeline::run(cfg);
  CHECK(slurp(dir / "report.json") == before);

  // Corrupting a stored fidelity is caught: flip one significant digit.
  auto cert_text = slurp(dir / "cert_45.json");
  auto pos = cert_text.find("\"certificate_value\": ");
  REQUIRE(pos != std::string::npos);
  auto digit = cert_text.find_first_of("123456789", pos);
  REQUIRE(digit != std::string::npos);
  cert_text[digit] = cert_text[digit] == '9' ? '8' : '9';
  {
    std::ofstream out(dir / "cert_45.json", std::ios::trunc);
    out << cert_text;
  }
  std::ostringstream log2;
  CHECK(pipeline::verify_run(dir.string(), log2) > 0);
}

}  // TEST_SUITE
