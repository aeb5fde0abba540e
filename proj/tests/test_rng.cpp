// RNG tests: stream independence, determinism, and sampling moments of the
// multinomial and Poisson helpers.

#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "qcert/rng.hpp"

using namespace qcert;

TEST_SUITE("rng") {

TEST_CASE("splitmix64 is deterministic and moves its state") {
  std::uint64_t s1 = 42, s2 = 42;
  auto a = rng::splitmix64_next(s1);
  auto b = rng::splitmix64_next(s2);
  CHECK(a == b);
  CHECK(s1 == s2);
  CHECK(rng::splitmix64_next(s1) != a);
}

TEST_CASE("xoshiro streams are reproducible and distinct") {
  rng::Xoshiro256pp g1(123, 0), g2(123, 0), g3(123, 1), g4(124, 0);
  bool same = true, diff_stream = false, diff_seed = false;
  for (int i = 0; i < 64; ++i) {
    auto v = g1.next();
    same &= v == g2.next();
    diff_stream |= v != g3.next();
    diff_seed |= v != g4.next();
  }
  CHECK(same);
  CHECK(diff_stream);
  CHECK(diff_seed);
}

TEST_CASE("uniform lies in [0,1) with sane mean") {
  rng::Xoshiro256pp g(7, 3);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double u = g.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  // Standard error is about 0.0009; allow five sigma.
  CHECK(std::abs(sum / n - 0.5) < 0.005);
}

TEST_CASE("multinomial conserves totals and matches probabilities") {
  rng::Xoshiro256pp g(2024, 5);
  std::vector<double> probs = {0.55, 0.25, 0.15, 0.05};
  const std::uint64_t n = 200000;
  auto counts = rng::multinomial(g, n, probs);
  REQUIRE(counts.size() == probs.size());
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  CHECK(total == n);
  for (std::size_t k = 0; k < probs.size(); ++k) {
    double sigma = std::sqrt(n * probs[k] * (1.0 - probs[k]));
    CHECK(std::abs(static_cast<double>(counts[k]) - n * probs[k]) < 5.0 * sigma);
  }
}

TEST_CASE("multinomial never draws a zero-probability cell") {
  rng::Xoshiro256pp g(9, 0);
  std::vector<double> probs = {0.5, 0.0, 0.5};
  auto counts = rng::multinomial(g, 50000, probs);
  CHECK(counts[1] == 0);
}

TEST_CASE("multinomial is deterministic per seed") {
  std::vector<double> probs = {0.3, 0.3, 0.4};
  rng::Xoshiro256pp g1(77, 2), g2(77, 2);
  CHECK(rng::multinomial(g1, 1000, probs) == rng::multinomial(g2, 1000, probs));
}

TEST_CASE("poisson has the right first two moments") {
  rng::Xoshiro256pp g(31337, 1);
  const double lambda = 3.7;
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    double v = static_cast<double>(rng::poisson(g, lambda));
    sum += v;
    sumsq += v * v;
  }
  double mean = sum / n;
  double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean - lambda) < 0.05);
  CHECK(std::abs(var - lambda) < 0.15);
}

TEST_CASE("poisson edge cases") {
  rng::Xoshiro256pp g(1, 0);
  CHECK(rng::poisson(g, 0.0) == 0);
  // Large lambda path stays finite and positive.
  auto big = rng::poisson(g, 5000.0);
  CHECK(big > 4000);
  CHECK(big < 6000);
}

}  // TEST_SUITE
