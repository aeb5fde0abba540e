// Schema construction: canonical words, moment/localizing matrices,
// Hermiticity equalities, the fidelity objective, quantum reference
// moments, and the JSON manifest.

#include "qcert/moments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "qcert/errors.hpp"
#include "qcert/linalg.hpp"

#include "json.hpp"

namespace qcert::moments {

namespace {
constexpr const char* kGenNames[kNumGenerators] = {"A0", "A1", "B0",
                                                   "B1", "B2", "B3"};
}

const char* generator_name(int g) {
  if (g < 0 || g >= kNumGenerators)
    throw ValidationError("generator id outside 0..5");
  return kGenNames[g];
}

int generator_from_name(const std::string& name) {
  for (int g = 0; g < kNumGenerators; ++g)
    if (name == kGenNames[g]) return g;
  throw ValidationError("unknown generator '" + name + "'");
}

std::string op_to_string(const OpSeq& op) {
  if (op.empty()) return "1";
  std::string out;
  for (std::size_t k = 0; k < op.size(); ++k) {
    if (k) out += ' ';
    out += generator_name(op[k]);
  }
  return out;
}

OpSeq op_from_string(const std::string& text) {
  if (text == "1") return {};
  OpSeq op;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) op.push_back(static_cast<std::uint8_t>(generator_from_name(tok)));
  if (op.empty()) throw ValidationError("empty operator word");
  return op;
}

bool Word::touches_swap_ancilla() const {
  for (auto g : b)
    if (g >= 4) return true;
  return false;
}

namespace {

// Remove adjacent equal generators (g^2 = 1), handling nested cancellation.
std::vector<std::uint8_t> stack_reduce(const std::vector<std::uint8_t>& seq) {
  std::vector<std::uint8_t> out;
  for (auto g : seq) {
    if (!out.empty() && out.back() == g)
      out.pop_back();
    else
      out.push_back(g);
  }
  return out;
}

OpSeq op_adjoint(const OpSeq& op) { return OpSeq(op.rbegin(), op.rend()); }

OpSeq op_concat(const OpSeq& x, const OpSeq& y) {
  OpSeq out = x;
  out.insert(out.end(), y.begin(), y.end());
  return out;
}

}  // namespace

Word canonicalize(const OpSeq& op) {
  std::vector<std::uint8_t> a, b;
  for (auto g : op) {
    if (g >= kNumGenerators) throw ValidationError("generator id outside 0..5");
    (g < 2 ? a : b).push_back(g);
  }
  Word fwd{stack_reduce(a), stack_reduce(b)};
  Word rev{{fwd.a.rbegin(), fwd.a.rend()}, {fwd.b.rbegin(), fwd.b.rend()}};
  return std::min(fwd, rev);
}

std::string word_to_string(const Word& w) {
  OpSeq joined(w.a.begin(), w.a.end());
  joined.insert(joined.end(), w.b.begin(), w.b.end());
  return op_to_string(joined);
}

int VarTable::intern(const Word& w) {
  auto it = ids.find(w);
  if (it != ids.end()) return it->second;
  int id = static_cast<int>(words.size());
  words.push_back(w);
  ids.emplace(w, id);
  return id;
}

int VarTable::lookup(const Word& w) const {
  auto it = ids.find(w);
  return it == ids.end() ? -1 : it->second;
}

void Affine::add(int var, double coeff) { terms.emplace_back(var, coeff); }

void Affine::compress() {
  std::sort(terms.begin(), terms.end());
  std::vector<std::pair<int, double>> merged;
  for (const auto& [v, c] : terms) {
    if (!merged.empty() && merged.back().first == v)
      merged.back().second += c;
    else
      merged.emplace_back(v, c);
  }
  std::erase_if(merged, [](const auto& t) { return std::abs(t.second) < 1e-14; });
  terms = std::move(merged);
}

double Affine::eval(const std::vector<double>& vals) const {
  double acc = constant;
  for (const auto& [v, c] : terms) acc += c * vals[v];
  return acc;
}

namespace {

// Operator lists for the moment matrix and the two localizing matrices.
// Distinct raw words (e.g. "A0 A1" and "A1 A0") label distinct rows even
// when their moments coincide.
const std::vector<OpSeq>& gamma_op_list() {
  static const std::vector<OpSeq> ops = {
      {},      {0},     {1},     {2},     {3},     {4},     {5},
      {0, 1},  {1, 0},  {2, 3},  {3, 2},  {2, 4},  {4, 2},  {2, 5},
      {5, 2},  {3, 4},  {4, 3},  {3, 5},  {5, 3},  {4, 5},  {5, 4},
      {0, 2},  {0, 3},  {1, 2},  {1, 3},  {0, 4},  {0, 5},  {1, 4},
      {1, 5},  {0, 1, 0}, {1, 0, 1}, {4, 5, 4}, {5, 4, 5},
      {0, 4, 5}, {0, 5, 4}, {1, 4, 5}, {1, 5, 4},
  };
  return ops;
}

std::vector<OpSeq> loc_op_list(bool plus) {
  std::vector<OpSeq> ops = {{},     {0},    {1},    {2},    {3},
                            {4},    {5},    {0, 2}, {0, 3}, {0, 4},
                            {0, 5}, {1, 2}, {1, 3}, {1, 4}, {1, 5}};
  ops.push_back(plus ? OpSeq{0, 1} : OpSeq{0, 1, 0, 2});
  return ops;
}

std::vector<std::pair<int, OpSeq>> loc_poly(bool plus) {
  if (plus) return {{1, {4, 2}}, {1, {4, 3}}};  // B2 B0 + B2 B1
  return {{1, {5, 2}}, {-1, {5, 3}}};           // B3 B0 - B3 B1
}

// <O_i^+ P O_j> as an affine form (no constant; identity moment is var 0,
// pinned elsewhere).
Affine monomial_terms(VarTable& vars, const OpSeq& oi,
                      const std::vector<std::pair<int, OpSeq>>& poly,
                      const OpSeq& oj) {
  Affine f;
  for (const auto& [sign, mono] : poly) {
    Word w = canonicalize(op_concat(op_adjoint(oi), op_concat(mono, oj)));
    f.add(vars.intern(w), static_cast<double>(sign));
  }
  f.compress();
  return f;
}

std::vector<std::pair<int, OpSeq>> poly_adjoint(
    const std::vector<std::pair<int, OpSeq>>& poly) {
  std::vector<std::pair<int, OpSeq>> out;
  out.reserve(poly.size());
  for (const auto& [s, m] : poly) out.emplace_back(s, op_adjoint(m));
  return out;
}

Affine affine_scale(const Affine& f, double s) {
  Affine out = f;
  out.constant *= s;
  for (auto& [v, c] : out.terms) c *= s;
  return out;
}

Affine affine_add(const Affine& x, const Affine& y) {
  Affine out = x;
  out.constant += y.constant;
  for (const auto& t : y.terms) out.terms.push_back(t);
  out.compress();
  return out;
}

// Normalized key for deduplicating equality forms: sorted terms with the
// leading coefficient made positive.
Affine normalize_form(const Affine& f) {
  Affine out = f;
  out.compress();
  if (!out.terms.empty() && out.terms.front().second < 0.0)
    out = affine_scale(out, -1.0);
  return out;
}

LocalizingSchema build_localizing(VarTable& vars, const std::string& tag,
                                  bool plus) {
  LocalizingSchema loc;
  loc.tag = tag;
  loc.poly = loc_poly(plus);
  loc.ops = loc_op_list(plus);
  loc.dim = static_cast<int>(loc.ops.size());
  auto dag = poly_adjoint(loc.poly);
  std::set<Affine> seen;
  loc.entry.resize(static_cast<std::size_t>(loc.dim) * loc.dim);
  for (int i = 0; i < loc.dim; ++i)
    for (int j = 0; j < loc.dim; ++j) {
      Affine fwd = monomial_terms(vars, loc.ops[i], loc.poly, loc.ops[j]);
      Affine bwd = monomial_terms(vars, loc.ops[i], dag, loc.ops[j]);
      loc.entry[static_cast<std::size_t>(i) * loc.dim + j] =
          affine_add(affine_scale(fwd, 0.5), affine_scale(bwd, 0.5));
      if (i <= j) {
        Affine diff = affine_add(fwd, affine_scale(bwd, -1.0));
        if (!diff.terms.empty()) {
          Affine key = normalize_form(diff);
          if (seen.insert(key).second) loc.hermiticity.push_back(key);
        }
      }
    }
  return loc;
}

}  // namespace

const SchemaSet& default_schemas() {
  static const SchemaSet schemas = [] {
    Manifest m;
    m.schema_version = 1;
    for (const auto& op : gamma_op_list()) m.moment_ops.push_back(op_to_string(op));
    for (bool plus : {true, false}) {
      Manifest::Localizing loc;
      loc.tag = plus ? "plus" : "minus";
      for (const auto& [s, w] : loc_poly(plus))
        loc.poly.emplace_back(s, op_to_string(w));
      for (const auto& op : loc_op_list(plus)) loc.ops.push_back(op_to_string(op));
      m.localizing.push_back(std::move(loc));
    }
    return build_schemas(m);
  }();
  return schemas;
}

SchemaSet build_schemas(const Manifest& m) {
  if (m.schema_version != 1)
    throw ValidationError("unsupported schema_version");
  if (m.localizing.size() != 2)
    throw ValidationError("manifest must declare exactly two localizing matrices");
  SchemaSet s;
  s.vars.intern(Word{});  // id 0 = identity
  s.gamma.dim = static_cast<int>(m.moment_ops.size());
  for (const auto& text : m.moment_ops) s.gamma.ops.push_back(op_from_string(text));
  s.gamma.entry.resize(static_cast<std::size_t>(s.gamma.dim) * s.gamma.dim);
  for (int i = 0; i < s.gamma.dim; ++i)
    for (int j = 0; j < s.gamma.dim; ++j) {
      Word w = canonicalize(
          op_concat(op_adjoint(s.gamma.ops[i]), s.gamma.ops[j]));
      s.gamma.entry[static_cast<std::size_t>(i) * s.gamma.dim + j] =
          s.vars.intern(w);
    }
  for (const auto& mloc : m.localizing) {
    bool plus = mloc.tag == "plus";
    if (!plus && mloc.tag != "minus")
      throw ValidationError("unknown localizing tag '" + mloc.tag + "'");
    LocalizingSchema built = build_localizing(s.vars, mloc.tag, plus);
    // The manifest must agree with the structural definition of the tag.
    std::vector<std::string> want_ops;
    for (const auto& op : built.ops) want_ops.push_back(op_to_string(op));
    if (mloc.ops != want_ops)
      throw ValidationError("localizing operator list does not match tag '" +
                            mloc.tag + "'");
    std::vector<std::pair<int, std::string>> want_poly;
    for (const auto& [sg, w] : built.poly)
      want_poly.emplace_back(sg, op_to_string(w));
    if (mloc.poly != want_poly)
      throw ValidationError("localizing polynomial does not match tag '" +
                            mloc.tag + "'");
    (plus ? s.loc_plus : s.loc_minus) = std::move(built);
  }
  std::sort(s.loc_plus.hermiticity.begin(), s.loc_plus.hermiticity.end());
  std::sort(s.loc_minus.hermiticity.begin(), s.loc_minus.hermiticity.end());
  const OpSeq known_ops[9] = {{},     {0},    {1},    {2},    {3},
                              {0, 2}, {0, 3}, {1, 2}, {1, 3}};
  for (int k = 0; k < 9; ++k) {
    int id = s.vars.lookup(canonicalize(known_ops[k]));
    if (id < 0) throw ValidationError("schema is missing a data-bound moment");
    s.known_ids[k] = id;
  }
  return s;
}

Affine fidelity_objective(double theta) {
  if (!(theta > 0.0) || theta > std::numbers::pi / 4.0 + 1e-12)
    throw ValidationError("fidelity_objective: theta outside (0, pi/4]");
  const SchemaSet& s = default_schemas();
  auto var = [&s](const OpSeq& op) {
    int id = s.vars.lookup(canonicalize(op));
    if (id < 0) throw ValidationError("objective word missing from schema");
    return id;
  };
  // Eight swap-ancilla words entering with weight cos(theta)sin(theta)/2.
  static const std::pair<int, OpSeq> bracket[8] = {
      {1, {1, 5}},          {1, {1, 0, 5, 4}},
      {1, {0, 1, 4, 5}},    {1, {0, 1, 0, 4, 5, 4}},
      {-1, {0, 1, 0, 5}},   {-1, {0, 1, 5, 4}},
      {-1, {1, 0, 4, 5}},   {-1, {1, 4, 5, 4}},
  };
  double kappa = std::cos(theta) * std::sin(theta);
  Affine f;
  f.constant = 0.25;
  f.add(var({0, 4}), 0.25);
  f.add(var({0}), 0.25 * std::cos(2.0 * theta));
  f.add(var({4}), 0.25 * std::cos(2.0 * theta));
  for (const auto& [sign, op] : bracket)
    f.add(var(op), 0.125 * kappa * sign);
  f.compress();
  return f;
}

double objective_on_moments(const std::vector<double>& vals, double theta) {
  if (vals.size() != static_cast<std::size_t>(default_schemas().vars.size()))
    throw ValidationError("moment vector length does not match schema");
  return fidelity_objective(theta).eval(vals);
}

namespace {

linalg::CMat generator_matrix(int g, double theta) {
  using linalg::CMat;
  CMat sz = qsim::pauli('z'), sx = qsim::pauli('x'), id = qsim::pauli('i');
  double mu = bell::mu_for_theta(theta);
  switch (g) {
    case 0: return linalg::kron(sz, id);
    case 1: return linalg::kron(sx, id);
    case 2:
      return linalg::kron(id, linalg::cadd(linalg::cscale(std::cos(mu), sz),
                                           linalg::cscale(std::sin(mu), sx)));
    case 3:
      return linalg::kron(id, linalg::cadd(linalg::cscale(std::cos(mu), sz),
                                           linalg::cscale(-std::sin(mu), sx)));
    case 4: return linalg::kron(id, sz);
    case 5: return linalg::kron(id, sx);
    default: throw ValidationError("generator id outside 0..5");
  }
}

}  // namespace

std::vector<double> moments_from_state(const qsim::DensityMatrix& rho,
                                       double theta) {
  rho.validate();
  const SchemaSet& s = default_schemas();
  std::array<linalg::CMat, kNumGenerators> gens;
  for (int g = 0; g < kNumGenerators; ++g) gens[g] = generator_matrix(g, theta);
  std::vector<double> vals(s.vars.size(), 0.0);
  for (int id = 0; id < s.vars.size(); ++id) {
    const Word& w = s.vars.words[id];
    linalg::CMat M = linalg::CMat::identity(4);
    for (auto g : w.a) M = linalg::cmatmul(M, gens[g]);
    for (auto g : w.b) M = linalg::cmatmul(M, gens[g]);
    vals[id] = linalg::trace(linalg::cmatmul(rho.m, M)).real();
  }
  return vals;
}

std::vector<double> quantum_moment_vector(double theta) {
  return moments_from_state(qsim::density_from_pure(qsim::target_state(theta)),
                            theta);
}

Manifest manifest_from_schemas(const SchemaSet& s) {
  Manifest m;
  m.schema_version = 1;
  for (const auto& op : s.gamma.ops) m.moment_ops.push_back(op_to_string(op));
  for (const LocalizingSchema* loc : {&s.loc_plus, &s.loc_minus}) {
    Manifest::Localizing ml;
    ml.tag = loc->tag;
    for (const auto& [sg, w] : loc->poly) ml.poly.emplace_back(sg, op_to_string(w));
    for (const auto& op : loc->ops) ml.ops.push_back(op_to_string(op));
    m.localizing.push_back(std::move(ml));
  }
  return m;
}

std::string manifest_to_json(const Manifest& m) {
  nlohmann::ordered_json j;
  j["schema_version"] = m.schema_version;
  j["moment_ops"] = m.moment_ops;
  j["localizing"] = nlohmann::ordered_json::array();
  for (const auto& loc : m.localizing) {
    nlohmann::ordered_json jl;
    jl["tag"] = loc.tag;
    jl["poly"] = nlohmann::ordered_json::array();
    for (const auto& [sg, w] : loc.poly)
      jl["poly"].push_back({{"sign", sg}, {"word", w}});
    jl["ops"] = loc.ops;
    j["localizing"].push_back(std::move(jl));
  }
  return j.dump(2) + "\n";
}

Manifest manifest_from_json(const std::string& text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("manifest parse error: ") + e.what());
  }
  try {
    Manifest m;
    m.schema_version = j.at("schema_version").get<int>();
    m.moment_ops = j.at("moment_ops").get<std::vector<std::string>>();
    for (const auto& jl : j.at("localizing")) {
      Manifest::Localizing loc;
      loc.tag = jl.at("tag").get<std::string>();
      for (const auto& jp : jl.at("poly"))
        loc.poly.emplace_back(jp.at("sign").get<int>(),
                              jp.at("word").get<std::string>());
      loc.ops = jl.at("ops").get<std::vector<std::string>>();
      m.localizing.push_back(std::move(loc));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("manifest field error: ") + e.what());
  }
}

}  // namespace qcert::moments
