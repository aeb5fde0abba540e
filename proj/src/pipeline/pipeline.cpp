// Run orchestration: config parsing, counts serialization and ingest,
// per-theta processing with a bounded worker pool, artifact emission, and
// independent re-verification of a finished output directory.

#include "qcert/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "qcert/errors.hpp"
#include "qcert/moments.hpp"
#include "qcert/sdp.hpp"

namespace qcert::pipeline {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
// Outcome-pair labels in 2*ia+ib order; '+' is the +1 outcome.
constexpr std::array<const char*, 4> kOutcomeKeys = {"++", "+-", "-+", "--"};

double parse_double(const std::string& text, const std::string& what) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw ValidationError("bad numeric value for " + what + ": '" + text + "'");
  }
  if (pos != text.size())
    throw ValidationError("bad numeric value for " + what + ": '" + text + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &pos);
  } catch (const std::exception&) {
    throw ValidationError("bad integer value for " + what + ": '" + text + "'");
  }
  if (pos != text.size() || (!text.empty() && text[0] == '-'))
    throw ValidationError("bad integer value for " + what + ": '" + text + "'");
  return v;
}

bool parse_bool(const std::string& text, const std::string& what) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ValidationError("bad boolean value for " + what + ": '" + text + "'");
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) out.push_back(parse_double(item, what));
  if (out.empty()) throw ValidationError(what + " list is empty");
  return out;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

const char* counting_name(qsim::CountingMode m) {
  return m == qsim::CountingMode::multinomial ? "multinomial" : "poisson";
}

qsim::CountingMode counting_from_name(const std::string& name) {
  if (name == "multinomial") return qsim::CountingMode::multinomial;
  if (name == "poisson") return qsim::CountingMode::poisson;
  throw ValidationError("unknown counting mode '" + name + "'");
}

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
  if (!out) throw ValidationError("write failed for '" + path + "'");
}

std::string theta_tag(double theta_deg) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", theta_deg);
  return buf;
}

ordered_json parse_json(const std::string& text, const std::string& what) {
  try {
    return ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw ValidationError("bad JSON in " + what + ": " + e.what());
  }
}

// Wraps nlohmann access so malformed artifacts surface as ValidationError
// naming the missing field instead of a raw type error.
const ordered_json& field(const ordered_json& j, const char* key,
                          const std::string& what) {
  auto it = j.find(key);
  if (it == j.end())
    throw ValidationError(what + " is missing field '" + key + "'");
  return *it;
}

ordered_json correlators_to_json(const bell::CorrelatorForm& c) {
  return ordered_json{{"mA", {c.mA[0], c.mA[1]}},
                      {"mB", {c.mB[0], c.mB[1]}},
                      {"corr",
                       {{c.corr[0][0], c.corr[0][1]},
                        {c.corr[1][0], c.corr[1][1]}}}};
}

bell::CorrelatorForm correlators_from_json(const ordered_json& j,
                                           const std::string& what) {
  bell::CorrelatorForm c;
  const auto& ma = field(j, "mA", what);
  const auto& mb = field(j, "mB", what);
  const auto& co = field(j, "corr", what);
  for (int i = 0; i < 2; ++i) {
    c.mA[i] = ma.at(i).get<double>();
    c.mB[i] = mb.at(i).get<double>();
    for (int k = 0; k < 2; ++k) c.corr[i][k] = co.at(i).at(k).get<double>();
  }
  return c;
}

ordered_json diag_to_json(const certify::SolveDiagnostics& d) {
  return ordered_json{{"status", sdp::to_string(d.status)},
                      {"iterations", d.iterations},
                      {"rel_gap", d.rel_gap},
                      {"primal_infeas", d.primal_infeas},
                      {"dual_infeas", d.dual_infeas}};
}

ordered_json mat_to_json(const linalg::Mat& m) {
  ordered_json rows = ordered_json::array();
  for (int i = 0; i < m.rows; ++i) {
    ordered_json row = ordered_json::array();
    for (int j = 0; j < m.cols; ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

linalg::Mat mat_from_json(const ordered_json& j, const std::string& what) {
  if (!j.is_array() || j.empty())
    throw ValidationError(what + ": matrix must be a non-empty array");
  int n = static_cast<int>(j.size());
  linalg::Mat m(n, static_cast<int>(j.at(0).size()));
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(j.at(i).size()) != m.cols)
      throw ValidationError(what + ": ragged matrix rows");
    for (int k = 0; k < m.cols; ++k) m(i, k) = j.at(i).at(k).get<double>();
  }
  return m;
}

// Binomial plug-in standard error of I_alpha: per-setting correlator
// variances (1 - c^2)/N plus the propagated variance of the pooled <A0>
// marginal. Covariances within a setting are ignored by construction.
double i_stderr_plugin(const bell::CountsRecord& counts, double alpha) {
  auto raw = bell::behavior_from_counts(counts);
  double var = 0.0;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      double n = static_cast<double>(counts.setting_total(x, y));
      double c = raw.at(x, y, 0, 0) - raw.at(x, y, 0, 1) - raw.at(x, y, 1, 0) +
                 raw.at(x, y, 1, 1);
      var += (1.0 - c * c) / n;
    }
  for (int y = 0; y < 2; ++y) {
    double n = static_cast<double>(counts.setting_total(0, y));
    double m = raw.at(0, y, 0, 0) + raw.at(0, y, 0, 1) - raw.at(0, y, 1, 0) -
               raw.at(0, y, 1, 1);
    var += alpha * alpha * (1.0 - m * m) / n / 4.0;
  }
  return std::sqrt(var);
}

ThetaResult process_behavior(const RunConfig& cfg, double theta_deg,
                             const bell::Behavior& raw, double f_t,
                             const bell::CountsRecord* counts) {
  double theta = theta_deg * kDegToRad;
  double alpha = bell::alpha_for_theta(theta);

  ThetaResult r;
  r.theta_deg = theta_deg;
  r.i_value = bell::tilted_chsh(bell::to_correlators(raw), alpha);
  r.i_stderr = counts ? i_stderr_plugin(*counts, alpha) : 0.0;
  r.local_bound = bell::local_bound(alpha);
  r.quantum_max = bell::quantum_max(alpha);

  certify::CertifyOptions copt;
  copt.tol = cfg.tol;
  copt.known_slack = cfg.known_slack;
  r.pipe = certify::certify_behavior(raw, theta, {}, copt);
  r.a0_given_y0 = r.pipe.raw_signaling.mA_by_y[0][0];
  r.a0_given_y1 = r.pipe.raw_signaling.mA_by_y[0][1];
  r.f_t = f_t;
  if (!cfg.eps_grid.empty())
    r.curve = certify::robust_curve(theta, cfg.eps_grid, copt);
  return r;
}

}  // namespace

void RunConfig::validate() const {
  if (mode == SourceMode::ingest) {
    if (in_dir.empty())
      throw ValidationError("ingest mode requires in_dir");
    if (infinite_sample)
      throw ValidationError("infinite_sample requires simulate mode");
  }
  if (theta_deg.empty()) throw ValidationError("theta list is empty");
  for (double t : theta_deg)
    if (!(t > 0.0) || t > 45.0 + 1e-12)
      throw ValidationError("theta must lie in (0, 45] degrees");
  for (std::size_t i = 1; i < theta_deg.size(); ++i)
    if (theta_deg[i] <= theta_deg[i - 1])
      throw ValidationError("theta list must be strictly increasing");
  if (trials < 1) throw ValidationError("trials must be >= 1");
  if (workers < 1) throw ValidationError("workers must be >= 1");
  if (!(tol > 0.0)) throw ValidationError("tol must be > 0");
  if (!(known_slack > 0.0)) throw ValidationError("known_slack must be > 0");
  if (noise.depolarizing_p < 0.0 || noise.depolarizing_p > 1.0)
    throw ValidationError("depolarizing_p must lie in [0, 1]");
  for (double e : eps_grid)
    if (e < 0.0) throw ValidationError("eps values must be >= 0");
  if (out_dir.empty()) throw ValidationError("out_dir is empty");
}

void apply_config_kv(RunConfig& cfg, const std::string& key,
                     const std::string& value) {
  if (key == "mode") {
    if (value == "simulate")
      cfg.mode = SourceMode::simulate;
    else if (value == "ingest")
      cfg.mode = SourceMode::ingest;
    else
      throw ValidationError("mode must be 'simulate' or 'ingest'");
  } else if (key == "in_dir") {
    cfg.in_dir = value;
  } else if (key == "theta") {
    cfg.theta_deg = parse_list(value, key);
  } else if (key == "trials") {
    cfg.trials = parse_u64(value, key);
  } else if (key == "infinite_sample") {
    cfg.infinite_sample = parse_bool(value, key);
  } else if (key == "counting") {
    cfg.counting = counting_from_name(value);
  } else if (key == "depolarizing_p") {
    cfg.noise.depolarizing_p = parse_double(value, key);
  } else if (key == "a0_offset") {
    cfg.noise.a_offset[0] = parse_double(value, key);
  } else if (key == "a1_offset") {
    cfg.noise.a_offset[1] = parse_double(value, key);
  } else if (key == "b0_offset") {
    cfg.noise.b_offset[0] = parse_double(value, key);
  } else if (key == "b1_offset") {
    cfg.noise.b_offset[1] = parse_double(value, key);
  } else if (key == "global_rotation") {
    cfg.noise.global_rotation = parse_double(value, key);
  } else if (key == "seed") {
    cfg.seed = parse_u64(value, key);
  } else if (key == "tol") {
    cfg.tol = parse_double(value, key);
  } else if (key == "known_slack") {
    cfg.known_slack = parse_double(value, key);
  } else if (key == "eps_grid") {
    cfg.eps_grid = parse_list(value, key);
  } else if (key == "out_dir") {
    cfg.out_dir = value;
  } else if (key == "workers") {
    cfg.workers = static_cast<int>(parse_u64(value, key));
  } else {
    throw ValidationError("unknown config key '" + key + "'");
  }
}

RunConfig config_from_file(const std::string& path) {
  RunConfig cfg;
  std::istringstream in(read_text(path));
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError(path + ":" + std::to_string(lineno) +
                            ": expected key = value");
    apply_config_kv(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

CountsBundle simulate_counts(const RunConfig& cfg, double theta_deg,
                             std::size_t theta_index) {
  double theta = theta_deg * kDegToRad;
  auto rho = qsim::apply_depolarizing(
      qsim::density_from_pure(qsim::target_state(theta)),
      cfg.noise.depolarizing_p);
  auto settings = qsim::apply_noise(qsim::ideal_measurements(theta), cfg.noise);

  qsim::TrialPlan plan;
  plan.trials_per_setting = cfg.trials;
  plan.mode = cfg.counting;
  plan.seed = cfg.seed + theta_index;

  CountsBundle b;
  b.selftest = qsim::sample_counts(qsim::born_behavior(rho, settings), plan,
                                   theta_deg);
  b.tomo = tomo::sample_tomo_counts(rho, plan, theta_deg);
  return b;
}

std::string counts_to_json(const CountsBundle& b) {
  ordered_json meta{{"theta_deg", b.selftest.theta_deg},
                    {"trials_per_setting", b.selftest.trials_per_setting},
                    {"counting_mode", b.selftest.counting_mode}};
  if (b.selftest.has_seed) meta["seed"] = b.selftest.seed;

  ordered_json selftest = ordered_json::array();
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      ordered_json counts;
      for (int o = 0; o < 4; ++o)
        counts[kOutcomeKeys[o]] = b.selftest.n[bell::Behavior::index(x, y, o >> 1, o & 1)];
      selftest.push_back(ordered_json{{"x", x}, {"y", y}, {"counts", counts}});
    }

  ordered_json tomo = ordered_json::array();
  for (int k = 0; k < 9; ++k) {
    ordered_json counts;
    for (int o = 0; o < 4; ++o) counts[kOutcomeKeys[o]] = b.tomo.n[k][o];
    tomo.push_back(ordered_json{{"basis", tomo::kBases[k]}, {"counts", counts}});
  }

  ordered_json root{{"metadata", meta},
                    {"selftest_settings", selftest},
                    {"tomo_settings", tomo}};
  return root.dump(2) + "\n";
}

CountsBundle counts_from_json(const std::string& text) {
  ordered_json root = parse_json(text, "counts file");
  const auto& meta = field(root, "metadata", "counts file");

  CountsBundle b;
  double theta_deg = field(meta, "theta_deg", "metadata").get<double>();
  std::uint64_t trials =
      field(meta, "trials_per_setting", "metadata").get<std::uint64_t>();
  std::string mode = field(meta, "counting_mode", "metadata").get<std::string>();
  counting_from_name(mode);  // label check
  if (!(theta_deg > 0.0) || theta_deg > 45.0 + 1e-12)
    throw ValidationError("metadata theta_deg must lie in (0, 45]");
  if (trials < 1) throw ValidationError("metadata trials_per_setting must be >= 1");

  for (auto* rec : {&b.selftest.theta_deg, &b.tomo.theta_deg}) *rec = theta_deg;
  b.selftest.trials_per_setting = b.tomo.trials_per_setting = trials;
  b.selftest.counting_mode = b.tomo.counting_mode = mode;
  if (meta.contains("seed")) {
    b.selftest.seed = b.tomo.seed = meta["seed"].get<std::uint64_t>();
    b.selftest.has_seed = b.tomo.has_seed = true;
  }

  const auto& selftest = field(root, "selftest_settings", "counts file");
  if (!selftest.is_array() || selftest.size() != 4)
    throw ValidationError("selftest_settings must list the 4 settings");
  std::array<bool, 4> seen{};
  for (const auto& entry : selftest) {
    int x = field(entry, "x", "selftest setting").get<int>();
    int y = field(entry, "y", "selftest setting").get<int>();
    if (x < 0 || x > 1 || y < 0 || y > 1)
      throw ValidationError("selftest setting indices must be 0 or 1");
    if (seen[2 * x + y])
      throw ValidationError("duplicate selftest setting (" + std::to_string(x) +
                            "," + std::to_string(y) + ")");
    seen[2 * x + y] = true;
    const auto& counts = field(entry, "counts", "selftest setting");
    for (int o = 0; o < 4; ++o)
      b.selftest.n[bell::Behavior::index(x, y, o >> 1, o & 1)] =
          field(counts, kOutcomeKeys[o], "selftest counts").get<std::uint64_t>();
  }

  const auto& tomo = field(root, "tomo_settings", "counts file");
  if (!tomo.is_array() || tomo.size() != 9)
    throw ValidationError("tomo_settings must list the 9 bases");
  std::array<bool, 9> seen_basis{};
  for (const auto& entry : tomo) {
    int k = tomo::basis_index(field(entry, "basis", "tomo setting").get<std::string>());
    if (seen_basis[k])
      throw ValidationError(std::string("duplicate tomo basis '") +
                            tomo::kBases[k] + "'");
    seen_basis[k] = true;
    const auto& counts = field(entry, "counts", "tomo setting");
    for (int o = 0; o < 4; ++o)
      b.tomo.n[k][o] =
          field(counts, kOutcomeKeys[o], "tomo counts").get<std::uint64_t>();
  }

  if (mode == "multinomial") {
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y)
        if (b.selftest.setting_total(x, y) != trials)
          throw ValidationError(
              "setting (" + std::to_string(x) + "," + std::to_string(y) +
              ") total does not match declared trials_per_setting");
    for (int k = 0; k < 9; ++k)
      if (b.tomo.basis_total(k) != trials)
        throw ValidationError(std::string("basis '") + tomo::kBases[k] +
                              "' total does not match declared trials_per_setting");
  }
  return b;
}

ThetaResult process_counts(const RunConfig& cfg, const CountsBundle& b) {
  double f_t = tomo::fidelity_from_counts(b.tomo, b.tomo.theta_deg * kDegToRad);
  return process_behavior(cfg, b.selftest.theta_deg,
                          bell::behavior_from_counts(b.selftest), f_t,
                          &b.selftest);
}

ThetaResult process_exact(const RunConfig& cfg, double theta_deg) {
  double theta = theta_deg * kDegToRad;
  auto rho = qsim::apply_depolarizing(
      qsim::density_from_pure(qsim::target_state(theta)),
      cfg.noise.depolarizing_p);
  auto settings = qsim::apply_noise(qsim::ideal_measurements(theta), cfg.noise);
  double f_t = tomo::fidelity_from_expectations(
      tomo::expectations_from_state(rho), theta);
  return process_behavior(cfg, theta_deg, qsim::born_behavior(rho, settings),
                          f_t, nullptr);
}

std::vector<ReferenceRow> reference_from_csv(const std::string& path) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line) || trim(line) != "theta_deg,f_t,f_s")
    throw ValidationError(path + ": expected header 'theta_deg,f_t,f_s'");
  std::vector<ReferenceRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    std::istringstream cells(line);
    std::string cell;
    ReferenceRow r;
    double* dst[3] = {&r.theta_deg, &r.f_t, &r.f_s};
    for (int c = 0; c < 3; ++c) {
      if (!std::getline(cells, cell, ','))
        throw ValidationError(path + ":" + std::to_string(lineno) +
                              ": expected 3 columns");
      *dst[c] = parse_double(trim(cell), "reference cell");
    }
    if (std::getline(cells, cell, ','))
      throw ValidationError(path + ":" + std::to_string(lineno) +
                            ": expected 3 columns");
    if (!(r.f_t > 0.0))
      throw ValidationError(path + ":" + std::to_string(lineno) +
                            ": f_t must be > 0");
    rows.push_back(r);
  }
  if (rows.empty()) throw ValidationError(path + ": no data rows");
  return rows;
}

Aggregates aggregate_ratios(const std::vector<ReferenceRow>& rows) {
  Aggregates a;
  double sum_all = 0.0, sum_high = 0.0;
  int n_all = 0, n_high = 0;
  for (const auto& r : rows) {
    if (!(r.f_t > 0.0)) throw ValidationError("f_t must be > 0");
    double ratio = r.f_s / r.f_t;
    sum_all += ratio;
    ++n_all;
    if (r.theta_deg >= 35.0 - 1e-9) {
      sum_high += ratio;
      ++n_high;
    }
  }
  if (n_all == 0) throw ValidationError("no rows to aggregate");
  a.mean_ratio_all = sum_all / n_all;
  a.mean_ratio_high_theta = n_high ? sum_high / n_high : 0.0;
  return a;
}

namespace {

__int128 abs128(__int128 v) { return v < 0 ? -v : v; }

__int128 gcd128(__int128 a, __int128 b) {
  a = abs128(a);
  b = abs128(b);
  while (b != 0) {
    __int128 t = a % b;
    a = b;
    b = t;
  }
  return a == 0 ? 1 : a;
}

}  // namespace

bool mean_ratio_rounds_to(const std::vector<ReferenceRow>& rows,
                          double min_theta, int millis) {
  // Entries are exact multiples of 1e-3, so the mean of f_s/f_t is the
  // rational (1/n) sum a_i/b_i with a_i, b_i integers in milli-units.
  __int128 num = 0, den = 1;
  long long n = 0;
  for (const auto& r : rows) {
    if (r.theta_deg < min_theta - 1e-9) continue;
    long long a = std::llround(r.f_s * 1000.0);
    long long b = std::llround(r.f_t * 1000.0);
    if (std::abs(r.f_s * 1000.0 - static_cast<double>(a)) > 1e-6 ||
        std::abs(r.f_t * 1000.0 - static_cast<double>(b)) > 1e-6)
      throw ValidationError("reference entries must be multiples of 0.001");
    if (b <= 0) throw ValidationError("f_t must be > 0");
    num = num * b + static_cast<__int128>(a) * den;
    den *= b;
    __int128 g = gcd128(num, den);
    num /= g;
    den /= g;
    ++n;
  }
  if (n == 0) throw ValidationError("no rows at or above min_theta");
  den *= n;
  // |num/den - millis/1000| <= 1/2000, all in integers.
  __int128 lhs = abs128(num * 2000 - static_cast<__int128>(2 * millis) * den);
  return lhs <= den;
}

namespace {

ordered_json config_to_json(const RunConfig& cfg) {
  return ordered_json{{"mode", cfg.mode == SourceMode::ingest ? "ingest" : "simulate"},
                      {"in_dir", cfg.in_dir},
                      {"theta_deg", cfg.theta_deg},
                      {"trials", cfg.trials},
                      {"infinite_sample", cfg.infinite_sample},
                      {"counting", counting_name(cfg.counting)},
                      {"depolarizing_p", cfg.noise.depolarizing_p},
                      {"a_offset", {cfg.noise.a_offset[0], cfg.noise.a_offset[1]}},
                      {"b_offset", {cfg.noise.b_offset[0], cfg.noise.b_offset[1]}},
                      {"global_rotation", cfg.noise.global_rotation},
                      {"seed", cfg.seed},
                      {"tol", cfg.tol},
                      {"known_slack", cfg.known_slack},
                      {"eps_grid", cfg.eps_grid},
                      {"out_dir", cfg.out_dir},
                      {"workers", cfg.workers}};
}

RunConfig config_from_json(const ordered_json& j) {
  RunConfig cfg;
  std::string mode = field(j, "mode", "config").get<std::string>();
  if (mode != "simulate" && mode != "ingest")
    throw ValidationError("config mode must be 'simulate' or 'ingest'");
  cfg.mode = mode == "ingest" ? SourceMode::ingest : SourceMode::simulate;
  cfg.in_dir = field(j, "in_dir", "config").get<std::string>();
  cfg.theta_deg = field(j, "theta_deg", "config").get<std::vector<double>>();
  cfg.trials = field(j, "trials", "config").get<std::uint64_t>();
  cfg.infinite_sample = field(j, "infinite_sample", "config").get<bool>();
  cfg.counting =
      counting_from_name(field(j, "counting", "config").get<std::string>());
  cfg.noise.depolarizing_p = field(j, "depolarizing_p", "config").get<double>();
  for (int i = 0; i < 2; ++i) {
    cfg.noise.a_offset[i] = field(j, "a_offset", "config").at(i).get<double>();
    cfg.noise.b_offset[i] = field(j, "b_offset", "config").at(i).get<double>();
  }
  cfg.noise.global_rotation = field(j, "global_rotation", "config").get<double>();
  cfg.seed = field(j, "seed", "config").get<std::uint64_t>();
  cfg.tol = field(j, "tol", "config").get<double>();
  cfg.known_slack = field(j, "known_slack", "config").get<double>();
  cfg.eps_grid = field(j, "eps_grid", "config").get<std::vector<double>>();
  cfg.out_dir = field(j, "out_dir", "config").get<std::string>();
  cfg.workers = field(j, "workers", "config").get<int>();
  return cfg;
}

std::string nqa2_to_json(const ThetaResult& r) {
  const auto& q = r.pipe.nqa2;
  ordered_json root{{"theta_deg", r.theta_deg},
                    {"s", q.s},
                    {"regularized", q.regularized.p},
                    {"correlators", correlators_to_json(q.correlators)},
                    {"moment_vector", q.moment_vector},
                    {"diag", diag_to_json(q.diag)}};
  return root.dump(2) + "\n";
}

std::string cert_to_json(const ThetaResult& r, const RunConfig& cfg) {
  const auto& c = r.pipe.cert;
  ordered_json duals = ordered_json::array();
  for (const auto& m : c.dual_blocks) duals.push_back(mat_to_json(m));
  ordered_json root{{"theta_deg", r.theta_deg},
                    {"known_slack", cfg.known_slack},
                    {"tol", cfg.tol},
                    {"correlators", correlators_to_json(r.pipe.nqa2.correlators)},
                    {"f_s", c.f_s},
                    {"certificate_value", c.certificate_value},
                    {"certificate_penalty", c.certificate_penalty},
                    {"primal_objective", c.primal_objective},
                    {"diag", diag_to_json(c.diag)},
                    {"eq_multipliers", c.eq_multipliers},
                    {"dual_blocks", duals}};
  return root.dump(2) + "\n";
}

ordered_json theta_report_json(const ThetaResult& r) {
  ordered_json curve = ordered_json::array();
  for (const auto& pt : r.curve)
    curve.push_back(ordered_json{{"epsilon", pt.epsilon}, {"f_s", pt.f_s}});
  return ordered_json{
      {"theta_deg", r.theta_deg},
      {"i_value", r.i_value},
      {"i_stderr", r.i_stderr},
      {"local_bound", r.local_bound},
      {"quantum_max", r.quantum_max},
      {"a0_given_y0", r.a0_given_y0},
      {"a0_given_y1", r.a0_given_y1},
      {"raw_signaling", r.pipe.raw_signaling.max_deficit},
      {"nqa2_s", r.pipe.nqa2.s},
      {"post_signaling", r.pipe.regularized_signaling.max_deficit},
      {"f_t", r.f_t},
      {"f_s", r.pipe.cert.f_s},
      {"ratio", r.pipe.cert.f_s / r.f_t},
      {"certificate",
       {{"value", r.pipe.cert.certificate_value},
        {"penalty", r.pipe.cert.certificate_penalty},
        {"primal_objective", r.pipe.cert.primal_objective},
        {"status", sdp::to_string(r.pipe.cert.diag.status)},
        {"iterations", r.pipe.cert.diag.iterations}}},
      {"curve", curve}};
}

void write_csvs(const RunConfig& cfg, const RunResult& res) {
  char buf[512];
  std::string fid = "theta_deg,f_t,f_s,ratio\n";
  std::string viol =
      "theta_deg,i_value,local_bound,quantum_max,i_stderr,a0_given_y0,"
      "a0_given_y1\n";
  std::string rep =
      "theta_deg,i_value,i_stderr,f_t,f_s,ratio,nqa2_s,raw_signaling,"
      "post_signaling,status,iterations\n";
  std::string curves = "theta_deg,epsilon,f_s\n";
  bool any_curve = false;
  for (const auto& r : res.per_theta) {
    std::snprintf(buf, sizeof buf, "%g,%.9f,%.9f,%.9f\n", r.theta_deg, r.f_t,
                  r.pipe.cert.f_s, r.pipe.cert.f_s / r.f_t);
    fid += buf;
    std::snprintf(buf, sizeof buf, "%g,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f\n",
                  r.theta_deg, r.i_value, r.local_bound, r.quantum_max,
                  r.i_stderr, r.a0_given_y0, r.a0_given_y1);
    viol += buf;
    std::snprintf(buf, sizeof buf,
                  "%g,%.9f,%.9f,%.9f,%.9f,%.9f,%.3e,%.3e,%.3e,%s,%d\n",
                  r.theta_deg, r.i_value, r.i_stderr, r.f_t, r.pipe.cert.f_s,
                  r.pipe.cert.f_s / r.f_t, r.pipe.nqa2.s,
                  r.pipe.raw_signaling.max_deficit,
                  r.pipe.regularized_signaling.max_deficit,
                  sdp::to_string(r.pipe.cert.diag.status),
                  r.pipe.cert.diag.iterations);
    rep += buf;
    for (const auto& pt : r.curve) {
      std::snprintf(buf, sizeof buf, "%g,%g,%.9f\n", r.theta_deg, pt.epsilon,
                    pt.f_s);
      curves += buf;
      any_curve = true;
    }
  }
  fs::path dir(cfg.out_dir);
  write_text((dir / "fidelities.csv").string(), fid);
  write_text((dir / "violation.csv").string(), viol);
  write_text((dir / "report.csv").string(), rep);
  if (any_curve) write_text((dir / "robust_curves.csv").string(), curves);
}

}  // namespace

RunResult run(const RunConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.out_dir);
  const std::size_t n = cfg.theta_deg.size();

  std::vector<ThetaResult> results(n);
  std::vector<CountsBundle> bundles(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        double td = cfg.theta_deg[i];
        if (cfg.infinite_sample) {
          results[i] = process_exact(cfg, td);
        } else {
          if (cfg.mode == SourceMode::ingest) {
            fs::path src = fs::path(cfg.in_dir) / ("counts_" + theta_tag(td) + ".json");
            bundles[i] = counts_from_json(read_text(src.string()));
            if (std::abs(bundles[i].selftest.theta_deg - td) > 1e-9)
              throw ValidationError(src.string() + ": metadata theta_deg " +
                                    theta_tag(bundles[i].selftest.theta_deg) +
                                    " does not match requested " + theta_tag(td));
          } else {
            bundles[i] = simulate_counts(cfg, td, i);
          }
          results[i] = process_counts(cfg, bundles[i]);
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  int nthreads = std::min<int>(cfg.workers, static_cast<int>(n));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (std::size_t i = 0; i < n; ++i)
    if (errors[i]) std::rethrow_exception(errors[i]);

  RunResult res;
  res.per_theta = std::move(results);
  std::vector<ReferenceRow> rows;
  for (const auto& r : res.per_theta)
    rows.push_back({r.theta_deg, r.f_t, r.pipe.cert.f_s});
  res.aggregates = aggregate_ratios(rows);

  fs::path dir(cfg.out_dir);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string tag = theta_tag(cfg.theta_deg[i]);
    if (!cfg.infinite_sample)
      write_text((dir / ("counts_" + tag + ".json")).string(),
                 counts_to_json(bundles[i]));
    write_text((dir / ("nqa2_" + tag + ".json")).string(),
               nqa2_to_json(res.per_theta[i]));
    write_text((dir / ("cert_" + tag + ".json")).string(),
               cert_to_json(res.per_theta[i], cfg));
  }
  write_csvs(cfg, res);

  ordered_json per_theta = ordered_json::array();
  for (const auto& r : res.per_theta) per_theta.push_back(theta_report_json(r));
  ordered_json report{{"schema_version", 1},
                      {"moment_convention", "real-symmetric"},
                      {"config", config_to_json(cfg)},
                      {"per_theta", per_theta},
                      {"aggregates",
                       {{"mean_ratio_all", res.aggregates.mean_ratio_all},
                        {"mean_ratio_high_theta",
                         res.aggregates.mean_ratio_high_theta}}}};
  write_text((dir / "report.json").string(), report.dump(2) + "\n");
  return res;
}

namespace {

struct Checker {
  std::ostream& out;
  int failures = 0;

  void operator()(const std::string& name, bool ok,
                  const std::string& detail = "") {
    out << "verify " << name << ": " << (ok ? "ok" : "FAIL");
    if (!ok && !detail.empty()) out << " (" << detail << ")";
    out << "\n";
    if (!ok) ++failures;
  }
};

std::string describe(double got, double want) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "got %.12g, want %.12g", got, want);
  return buf;
}

// Moment matrix over the shared schema evaluated at a stored assignment.
linalg::Mat gamma_at(const std::vector<double>& moment_vector) {
  const auto& s = moments::default_schemas();
  if (static_cast<int>(moment_vector.size()) != s.vars.size())
    throw ValidationError("moment_vector has wrong length");
  linalg::Mat g(s.gamma.dim, s.gamma.dim);
  for (int i = 0; i < s.gamma.dim; ++i)
    for (int j = 0; j < s.gamma.dim; ++j)
      g(i, j) = moment_vector[s.gamma.at(i, j)];
  return g;
}

}  // namespace

int verify_run(const std::string& dir, std::ostream& out) {
  Checker check{out};
  fs::path root(dir);

  ordered_json report =
      parse_json(read_text((root / "report.json").string()), "report.json");
  RunConfig cfg = config_from_json(field(report, "config", "report.json"));
  const auto& per_theta = field(report, "per_theta", "report.json");

  std::vector<ReferenceRow> rows;
  for (const auto& row : per_theta) {
    double theta_deg = field(row, "theta_deg", "per_theta row").get<double>();
    double theta = theta_deg * kDegToRad;
    const std::string tag = theta_tag(theta_deg);
    const std::string label = "theta=" + tag;

    double row_ft = field(row, "f_t", "per_theta row").get<double>();
    double row_fs = field(row, "f_s", "per_theta row").get<double>();
    double row_i = field(row, "i_value", "per_theta row").get<double>();
    rows.push_back({theta_deg, row_ft, row_fs});

    // Regularization artifact.
    ordered_json nq = parse_json(read_text((root / ("nqa2_" + tag + ".json")).string()),
                                 "nqa2_" + tag + ".json");
    bell::Behavior reg;
    auto regp = field(nq, "regularized", "nqa2 artifact").get<std::vector<double>>();
    if (regp.size() != 16) throw ValidationError("regularized must have 16 entries");
    std::copy(regp.begin(), regp.end(), reg.p.begin());
    reg.validate();
    double s_stored = field(nq, "s", "nqa2 artifact").get<double>();
    auto mv = field(nq, "moment_vector", "nqa2 artifact").get<std::vector<double>>();
    auto corr_stored =
        correlators_from_json(field(nq, "correlators", "nqa2 artifact"), "nqa2");

    double post_sig = bell::signaling_deficit(reg).max_deficit;
    check(label + " regularized no-signaling", post_sig <= 1e-9,
          describe(post_sig, 0.0));

    auto corr_re = bell::to_correlators(reg);
    double corr_diff = 0.0;
    for (int i = 0; i < 2; ++i) {
      corr_diff = std::max(corr_diff, std::abs(corr_re.mA[i] - corr_stored.mA[i]));
      corr_diff = std::max(corr_diff, std::abs(corr_re.mB[i] - corr_stored.mB[i]));
      for (int k = 0; k < 2; ++k)
        corr_diff = std::max(corr_diff,
                             std::abs(corr_re.corr[i][k] - corr_stored.corr[i][k]));
    }
    check(label + " stored correlators match behavior", corr_diff <= 1e-12);

    double mineig = linalg::sym_min_eig(gamma_at(mv));
    check(label + " moment matrix PSD", mineig >= -1e-8, describe(mineig, 0.0));

    const auto& s = moments::default_schemas();
    std::array<double, 9> kv = {1.0,
                                corr_stored.mA[0],
                                corr_stored.mA[1],
                                corr_stored.mB[0],
                                corr_stored.mB[1],
                                corr_stored.corr[0][0],
                                corr_stored.corr[0][1],
                                corr_stored.corr[1][0],
                                corr_stored.corr[1][1]};
    double kv_diff = 0.0;
    for (int k = 0; k < 9; ++k)
      kv_diff = std::max(kv_diff, std::abs(mv[s.known_ids[k]] - kv[k]));
    check(label + " moment vector carries the correlators", kv_diff <= 1e-9,
          describe(kv_diff, 0.0));

    // Counts artifact (finite-sample runs only).
    if (!cfg.infinite_sample) {
      CountsBundle b =
          counts_from_json(read_text((root / ("counts_" + tag + ".json")).string()));
      double ft_re = tomo::fidelity_from_counts(b.tomo, theta);
      check(label + " tomographic fidelity from counts",
            std::abs(ft_re - row_ft) <= 1e-9, describe(ft_re, row_ft));

      auto raw = bell::behavior_from_counts(b.selftest);
      double i_re = bell::tilted_chsh(bell::to_correlators(raw),
                                      bell::alpha_for_theta(theta));
      check(label + " violation from counts", std::abs(i_re - row_i) <= 1e-9,
            describe(i_re, row_i));

      double dist2 = 0.0;
      for (int k = 0; k < 16; ++k) {
        double d = reg.p[k] - raw.p[k];
        dist2 += d * d;
      }
      double dist = std::sqrt(dist2);
      check(label + " distance within stored s", dist <= s_stored + 1e-6,
            describe(dist, s_stored));
    } else {
      auto rho = qsim::apply_depolarizing(
          qsim::density_from_pure(qsim::target_state(theta)),
          cfg.noise.depolarizing_p);
      auto settings =
          qsim::apply_noise(qsim::ideal_measurements(theta), cfg.noise);
      double ft_re = tomo::fidelity_from_expectations(
          tomo::expectations_from_state(rho), theta);
      check(label + " tomographic fidelity from model",
            std::abs(ft_re - row_ft) <= 1e-9, describe(ft_re, row_ft));
      double i_re =
          bell::tilted_chsh(bell::to_correlators(qsim::born_behavior(rho, settings)),
                            bell::alpha_for_theta(theta));
      check(label + " violation from model", std::abs(i_re - row_i) <= 1e-9,
            describe(i_re, row_i));
    }

    // Certificate artifact: rebuild the program and re-price the dual.
    ordered_json ct = parse_json(read_text((root / ("cert_" + tag + ".json")).string()),
                                 "cert_" + tag + ".json");
    auto corr_cert =
        correlators_from_json(field(ct, "correlators", "cert artifact"), "cert");
    double slack = field(ct, "known_slack", "cert artifact").get<double>();
    double cert_value = field(ct, "certificate_value", "cert artifact").get<double>();
    double cert_fs = field(ct, "f_s", "cert artifact").get<double>();
    auto nu = field(ct, "eq_multipliers", "cert artifact").get<std::vector<double>>();
    std::vector<linalg::Mat> duals;
    for (const auto& mj : field(ct, "dual_blocks", "cert artifact"))
      duals.push_back(mat_from_json(mj, "dual block"));

    sdp::SdpProblem prob = certify::build_swap_problem(corr_cert, theta, slack);
    double recomputed = 0.0;
    bool cert_ok = true;
    std::string cert_note;
    try {
      recomputed = sdp::certified_lower_bound_from_dual(prob, duals, nu).value;
      cert_ok = std::abs(recomputed - cert_value) <= 1e-9;
      cert_note = describe(recomputed, cert_value);
    } catch (const std::exception& e) {
      cert_ok = false;
      cert_note = e.what();
    }
    check(label + " certificate re-evaluates", cert_ok, cert_note);
    check(label + " f_s equals floored certificate",
          std::abs(cert_fs - std::max(0.0, cert_value)) <= 1e-12 &&
              std::abs(row_fs - cert_fs) <= 1e-12);
  }

  Aggregates agg = aggregate_ratios(rows);
  const auto& stored_agg = field(report, "aggregates", "report.json");
  double all = field(stored_agg, "mean_ratio_all", "aggregates").get<double>();
  double high =
      field(stored_agg, "mean_ratio_high_theta", "aggregates").get<double>();
  check("aggregates mean_ratio_all", std::abs(agg.mean_ratio_all - all) <= 1e-12,
        describe(agg.mean_ratio_all, all));
  check("aggregates mean_ratio_high_theta",
        std::abs(agg.mean_ratio_high_theta - high) <= 1e-12,
        describe(agg.mean_ratio_high_theta, high));

  out << (check.failures == 0 ? "verify passed" : "verify FAILED") << " ("
      << check.failures << " failures)\n";
  return check.failures;
}

}  // namespace qcert::pipeline
