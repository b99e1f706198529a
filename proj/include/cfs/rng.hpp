#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace cfs {

// xoshiro256** seeded through splitmix64. Every stochastic draw in the
// toolkit goes through an explicit Rng so runs are reproducible from a seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  // Uniform integer in [0, n); n must be > 0.
  std::size_t below(std::size_t n);
  // Standard normal via Box-Muller; the paired draw is cached.
  double normal();
  // Standard Gumbel: -log(-log u) with u clamped to [1e-12, 1 - 1e-12].
  double gumbel();
  // Gamma(shape, 1) by Marsaglia-Tsang; used for Dirichlet draws.
  double gamma(double shape);

  std::vector<std::size_t> permutation(std::size_t n);

  // Independent child stream, e.g. one per experiment cell.
  Rng split();

  const std::array<std::uint64_t, 4>& state() const { return s_; }

 private:
  std::array<std::uint64_t, 4> s_{};
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace cfs
