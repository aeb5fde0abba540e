#include "qcert/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace qcert::rng {

std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {
inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}
}  // namespace

Xoshiro256pp::Xoshiro256pp(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t sm = seed ^ ((stream + 1) * 0x9E3779B97F4A7C15ULL);
  for (auto& w : s_) w = splitmix64_next(sm);
}

std::uint64_t Xoshiro256pp::next() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Xoshiro256pp::uniform() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::vector<std::uint64_t> multinomial(Xoshiro256pp& g, std::uint64_t n,
                                       const std::vector<double>& p) {
  const std::size_t k = p.size();
  std::vector<double> cum(k);
  double c = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (p[i] < -1e-12) throw std::invalid_argument("multinomial: negative probability");
    c += p[i];
    cum[i] = c;
  }
  std::vector<std::uint64_t> counts(k, 0);
  for (std::uint64_t t = 0; t < n; ++t) {
    const double u = g.uniform();
    std::size_t j = 0;
    while (j + 1 < k && u >= cum[j]) ++j;
    ++counts[j];
  }
  return counts;
}

namespace {

std::uint64_t poisson_inversion(Xoshiro256pp& g, double lambda) {
  const double u = g.uniform();
  double p = std::exp(-lambda);
  double cum = p;
  std::uint64_t k = 0;
  while (u >= cum) {
    ++k;
    p *= lambda / static_cast<double>(k);
    cum += p;
    if (k > 1000) break;  // cannot happen for lambda <= 10 except by rounding
  }
  return k;
}

// PTRS transformed rejection (W. Hormann, "The transformed rejection method
// for generating Poisson random variables", 1993). Valid for lambda >= 10.
std::uint64_t poisson_ptrs(Xoshiro256pp& g, double lambda) {
  const double slam = std::sqrt(lambda);
  const double loglam = std::log(lambda);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = g.uniform() - 0.5;
    const double v = g.uniform();
    const double us = 0.5 - std::fabs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        kf * loglam - lambda - std::lgamma(kf + 1.0))
      return static_cast<std::uint64_t>(kf);
  }
}

}  // namespace

std::uint64_t poisson(Xoshiro256pp& g, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("poisson: negative mean");
  if (lambda == 0.0) return 0;
  return lambda <= 10.0 ? poisson_inversion(g, lambda) : poisson_ptrs(g, lambda);
}

}  // namespace qcert::rng
