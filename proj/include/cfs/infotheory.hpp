#pragma once

#include "cfs/rng.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cfs {

// Exact probability table p(x, s, z) over finite alphabets.
struct DiscreteJoint {
  std::size_t nx = 0;
  std::size_t ns = 0;
  std::size_t nz = 0;
  std::vector<double> p;  // index (x * ns + s) * nz + z

  double at(std::size_t x, std::size_t s, std::size_t z) const { return p[(x * ns + s) * nz + z]; }
  double& at(std::size_t x, std::size_t s, std::size_t z) { return p[(x * ns + s) * nz + z]; }

  static DiscreteJoint zeros(std::size_t nx, std::size_t ns, std::size_t nz);
  // Throws ContractError unless entries are >= 0 and sum to 1 within 1e-12.
  void validate() const;
};

// Deterministic representations a(x), b(x) given as lookup tables over the
// x alphabet.
struct RepMap {
  std::vector<std::size_t> a;
  std::vector<std::size_t> b;

  std::size_t na() const;
  std::size_t nb() const;
  void validate(std::size_t nx) const;
};

// Variables of the joint model, combinable as bit masks.
enum Variable : unsigned { kX = 1u, kS = 2u, kZ = 4u, kA = 8u, kB = 16u };

// Entropy in bits of a probability vector (0 log 0 = 0). Throws ContractError
// if entries are negative or do not sum to 1 within 1e-9.
double entropy_bits(std::span<const double> dist);

// The joint law of (x, s, z, a(x), b(x)); every quantity is an exact finite
// sum in bits.
class InfoModel {
 public:
  InfoModel(const DiscreteJoint& joint, const RepMap& reps);

  double entropy(unsigned vars) const;
  double conditional_entropy(unsigned vars, unsigned given) const;
  // I(u; v | given) = H(u, given) + H(v, given) - H(u, v, given) - H(given).
  double mutual_information(unsigned u, unsigned v, unsigned given = 0) const;

 private:
  struct Outcome {
    std::array<std::size_t, 5> code;  // x, s, z, a, b
    double mass;
  };
  std::array<std::size_t, 5> sizes_{};
  std::vector<Outcome> outcomes_;
  mutable std::array<std::optional<double>, 32> cache_;
};

// max of I(s;z), H(x|s,z), H(s|x,z), H(z|x,s), I(s;z|b), I(s;z|a).
double epsilon_of(const DiscreteJoint& joint, const RepMap& reps);

struct BoundReport {
  std::string name;
  std::vector<std::pair<std::string, double>> terms;  // bits
  double epsilon = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // rhs - lhs
  bool holds = true;   // slack >= -1e-9

  double term(const std::string& key) const;
};

inline constexpr double kBoundTolerance = 1e-9;

// I(a;x|b) + I(b;x|s) - H(z) - 4e <= I(a;s)
BoundReport verify_theorem1(const DiscreteJoint& joint, const RepMap& reps);
// [0]: I(a;s) + 2 I(b;x|s) - H(z) - H(b) - 6e <= I(a;x|b)
// [1]: I(a;x|b) <= I(a;s) - I(b;x|s) + H(z) + 4e
std::array<BoundReport, 2> verify_theorem1_twosided(const DiscreteJoint& joint, const RepMap& reps);
// I(a,b;x) + I(b;x|s) - I(b;x) - H(z) - 4e <= I(a;s)
BoundReport verify_joint_training_bound(const DiscreteJoint& joint, const RepMap& reps);
// [0]: I(a;x) - H(x) + I(x;s) <= I(a;s);  [1]: the same with z.  Only reps.a is used.
std::array<BoundReport, 2> verify_theorem2(const DiscreteJoint& joint, const RepMap& reps);
// [0]: -e <= I(a;x) - I(a;s) - I(a;z);  [1]: I(a;x) - I(a;s) - I(a;z) <= 2e
std::array<BoundReport, 2> verify_additive_decomposition(const DiscreteJoint& joint,
                                                         const RepMap& reps);

// Scalar Gaussian channel x = a + n, in nats:
//   lhs = H(x) - 0.5 ln(2 pi) - 0.5 * MMSE,  mi = I(a; x).
struct GaussianCheck {
  double lhs_nats = 0.0;
  double mi_nats = 0.0;
  bool holds = true;  // lhs <= mi + 1e-12
};

// Throws ContractError on a nonpositive variance.
GaussianCheck mse_mi_gaussian_check(double var_signal, double var_noise);

// ---- randomized verification ---------------------------------------------

struct TheoryInstance {
  DiscreteJoint joint;
  RepMap reps;
  std::string generator;  // "dirichlet" or "near-assumption"
};

// Dirichlet(1) tables, or a structured eps = 0 joint (x pairs (s, z)) mixed
// with Dirichlet noise at weight <= 0.05. |S|, |Z| <= max_sz, |X| <= max_x.
TheoryInstance random_theory_instance(Rng& rng, std::size_t max_x = 9, std::size_t max_sz = 3);
DiscreteJoint random_dirichlet_joint(std::size_t nx, std::size_t ns, std::size_t nz, Rng& rng);

struct TheoryRow {
  std::size_t instance = 0;
  std::uint64_t seed = 0;
  std::string generator;
  std::size_t nx = 0, ns = 0, nz = 0, na = 0, nb = 0;
  double epsilon = 0.0;
  std::vector<std::pair<std::string, double>> terms;
  std::vector<BoundReport> bounds;
  bool holds = true;
};

TheoryRow evaluate_theory_instance(const TheoryInstance& inst, std::size_t index, std::uint64_t seed);

struct TheorySuiteResult {
  std::vector<TheoryRow> rows;
  std::size_t violations = 0;  // rows with any failing bound
};

// Instance i is generated from Rng(seed_i) where seed_i is the i-th draw of
// Rng(seed).
TheorySuiteResult run_theory_suite(std::size_t trials, std::uint64_t seed);

void write_theory_csv(std::ostream& out, const TheorySuiteResult& result);

}  // namespace cfs
