#pragma once
// Moment-matrix schema for device-independent certification: words over
// the six dichotomic generators A0,A1,B0,B1,B2,B3, their canonical moment
// labels, the 37x37 moment matrix, two 16x16 localizing matrices for the
// polar-decomposition operators B2(B0+B1) and B3(B0-B1), the entrywise
// Hermiticity equalities those operators satisfy, the fidelity objective,
// and a versioned JSON manifest with bit-exact round trip.

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "qcert/qsim.hpp"

namespace qcert::moments {

// Generator ids: 0=A0, 1=A1 on side A; 2=B0, 3=B1, 4=B2, 5=B3 on side B.
// All six are Hermitian involutions; A-side and B-side commute.
inline constexpr int kNumGenerators = 6;

const char* generator_name(int g);
int generator_from_name(const std::string& name);  // throws on unknown

// A raw operator word: product of generators in written order. Kept
// verbatim (not canonicalized) because distinct words label distinct
// moment-matrix rows.
using OpSeq = std::vector<std::uint8_t>;

std::string op_to_string(const OpSeq& op);       // "A0 A1 B2"; identity = "1"
OpSeq op_from_string(const std::string& text);   // inverse of the above

// Canonical moment label. Sides are split (they commute), each side is
// stack-reduced (involutions), and the representative is the lexmin of
// the word and its adjoint (adjoint = per-side reversal) — valid because
// moments are read in the real-symmetric convention v(w) = Re<w>.
struct Word {
  std::vector<std::uint8_t> a, b;

  bool operator==(const Word& o) const = default;
  bool operator<(const Word& o) const {
    return std::tie(a, b) < std::tie(o.a, o.b);
  }
  bool identity() const { return a.empty() && b.empty(); }
  bool touches_swap_ancilla() const;  // any B2/B3 generator present
};

Word canonicalize(const OpSeq& op);
std::string word_to_string(const Word& w);

// Shared variable table; id 0 is always the identity moment.
struct VarTable {
  std::vector<Word> words;
  std::map<Word, int> ids;

  int intern(const Word& w);
  int lookup(const Word& w) const;  // -1 when absent
  int size() const { return static_cast<int>(words.size()); }
};

// constant + sum_k coeff_k * v[var_k], terms sorted by var id
struct Affine {
  double constant = 0.0;
  std::vector<std::pair<int, double>> terms;

  void add(int var, double coeff);
  void compress();  // merge duplicates, drop ~0 coefficients, sort
  double eval(const std::vector<double>& vals) const;
  bool operator==(const Affine& o) const = default;
  bool operator<(const Affine& o) const {
    return std::tie(terms, constant) < std::tie(o.terms, o.constant);
  }
};

// Moment matrix Gamma: entry (i,j) is the single variable <ops[i]^+ ops[j]>.
struct MomentSchema {
  std::vector<OpSeq> ops;
  int dim = 0;
  std::vector<int> entry;  // dim*dim var ids, row-major

  int at(int i, int j) const { return entry[static_cast<std::size_t>(i) * dim + j]; }
};

// One localizing matrix Gamma(P) for P = sum_k sign_k * word_k. Entries are
// symmetrized, (1/2)<O_i^+ (P + P^+) O_j>; `hermiticity` carries the deduped
// entrywise constraints <O_i^+ P O_j> = <O_i^+ P^+ O_j>, which hold for the
// polar-decomposition operators because they are Hermitian products.
struct LocalizingSchema {
  std::string tag;  // "plus" or "minus"
  std::vector<std::pair<int, OpSeq>> poly;  // (sign, word)
  std::vector<OpSeq> ops;
  int dim = 0;
  std::vector<Affine> entry;        // dim*dim, row-major
  std::vector<Affine> hermiticity;  // forms constrained to equal 0

  const Affine& at(int i, int j) const {
    return entry[static_cast<std::size_t>(i) * dim + j];
  }
};

// Indices of the nine data-bound moments, in slot order:
// 1, <A0>, <A1>, <B0>, <B1>, <A0B0>, <A0B1>, <A1B0>, <A1B1>.
using KnownIds = std::array<int, 9>;

struct SchemaSet {
  VarTable vars;
  MomentSchema gamma;
  LocalizingSchema loc_plus;   // B2(B0+B1)
  LocalizingSchema loc_minus;  // B3(B0-B1)
  KnownIds known_ids{};
};

// The frozen default schema (built once, immutable).
const SchemaSet& default_schemas();

// Fidelity of the extracted state with the target |psi(theta)>, as an
// affine form over the moment variables. Theta in radians.
Affine fidelity_objective(double theta);
double objective_on_moments(const std::vector<double>& vals, double theta);

// Exact quantum values of every schema variable for the reference model
// (target state, ideal measurements, B2/B3 = the ideal extraction basis),
// optionally on an arbitrary two-qubit state.
std::vector<double> quantum_moment_vector(double theta);
std::vector<double> moments_from_state(const qsim::DensityMatrix& rho,
                                       double theta);

// Versioned manifest: operator words as strings, bit-exact round trip.
struct Manifest {
  int schema_version = 1;
  std::vector<std::string> moment_ops;
  struct Localizing {
    std::string tag;
    std::vector<std::pair<int, std::string>> poly;  // (sign, word)
    std::vector<std::string> ops;

    bool operator==(const Localizing& o) const = default;
  };
  std::vector<Localizing> localizing;

  bool operator==(const Manifest& o) const = default;
};

Manifest manifest_from_schemas(const SchemaSet& s);
std::string manifest_to_json(const Manifest& m);
Manifest manifest_from_json(const std::string& text);  // throws ValidationError
SchemaSet build_schemas(const Manifest& m);

}  // namespace qcert::moments
