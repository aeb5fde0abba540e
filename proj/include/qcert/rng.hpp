#pragma once
// Seedable, portable random numbers: xoshiro256++ states initialized by a
// splitmix64 chain. std::mt19937 with std:: distributions is avoided on
// purpose — distribution implementations vary across standard libraries,
// and the sampling here must be bit-reproducible everywhere.
//
// Stream splitting: generator(seed, stream) fills its state from splitmix64
// iterated on  seed XOR (stream+1)*0x9E3779B97F4A7C15  (golden-ratio
// spacing). Distinct (seed, stream) pairs give decorrelated sequences, so
// per-setting draws are independent of evaluation order.

#include <array>
#include <cstdint>
#include <vector>

namespace qcert::rng {

// One splitmix64 step: advances state, returns the next value.
std::uint64_t splitmix64_next(std::uint64_t& state);

class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next();

  // uniform double in [0, 1), 53-bit resolution
  double uniform();

 private:
  std::array<std::uint64_t, 4> s_;
};

// n draws from the categorical distribution with probabilities p
// (nonnegative, summing to ~1; any shortfall goes to the last category).
// Returns per-category counts.
std::vector<std::uint64_t> multinomial(Xoshiro256pp& g, std::uint64_t n,
                                       const std::vector<double>& p);

// Poisson draw: CDF inversion for small means, Hormann's PTRS transformed
// rejection above lambda = 10.
std::uint64_t poisson(Xoshiro256pp& g, double lambda);

}  // namespace qcert::rng
