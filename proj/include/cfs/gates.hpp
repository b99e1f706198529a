#pragma once

#include "cfs/matrix.hpp"
#include "cfs/rng.hpp"
#include "cfs/tape.hpp"

#include <cstddef>
#include <vector>

namespace cfs {

// Stochastic gates: G_i = clamp(mu_i + zeta_i, 0, 1), zeta_i ~ N(0, sigma^2),
// with the expected-open-gate penalty lambda * sum_i Phi(mu_i / sigma).
struct GateVector {
  Matrix mu;  // 1 x d
  double sigma = 0.5;
  double lambda = 0.1;

  // All means start at 0.5, i.e. half open.
  static GateVector initial(std::size_t d, double sigma = 0.5, double lambda = 0.1);

  std::size_t size() const { return static_cast<std::size_t>(mu.cols()); }
  // Throws ContractError unless sigma > 0, lambda >= 0 and mu is a finite row.
  void validate() const;
};

// One draw of zeta (1 x d); the same draw is shared by every row of a batch.
Matrix stg_noise(std::size_t d, double sigma, Rng& rng);
Matrix stg_sample(const GateVector& gates, Rng& rng);
Matrix stg_sample_with_noise(const GateVector& gates, const Matrix& noise);
Matrix stg_gate_deterministic(const GateVector& gates);
double stg_penalty(const GateVector& gates);
// d(penalty)/d(mu) = lambda * phi(mu / sigma) / sigma.
Matrix stg_penalty_grad(const GateVector& gates);
std::size_t open_gate_count(const GateVector& gates);

// Tape forms; mu must be a 1 x d variable.
Var stg_gate_on_tape(Tape& tape, Var mu, const Matrix& noise);
Var stg_penalty_on_tape(Tape& tape, Var mu, double sigma, double lambda);

// T(b) = T0 * (TB / T0)^(b / B). Throws ContractError if b > B.
double concrete_schedule(double t0, double tb, std::size_t total_epochs, std::size_t epoch);

// k rows of Gumbel-softmax weights over d features.
struct ConcreteSelector {
  Matrix log_alpha;  // k x d
  double temperature = 10.0;
  double initial_temperature = 10.0;
  double final_temperature = 0.1;
  std::size_t total_epochs = 200;

  // log_alpha uniform in [log 1e-2, log 2e-2].
  static ConcreteSelector initial(std::size_t k, std::size_t d, Rng& rng, double t0 = 10.0,
                                  double tb = 0.1, std::size_t total_epochs = 200);

  std::size_t rows() const { return static_cast<std::size_t>(log_alpha.rows()); }
  std::size_t features() const { return static_cast<std::size_t>(log_alpha.cols()); }
  void set_epoch(std::size_t epoch);
};

Matrix gumbel_noise(std::size_t rows, std::size_t cols, Rng& rng);
Matrix concrete_sample(const ConcreteSelector& sel, Rng& rng);
Matrix concrete_sample_with_noise(const ConcreteSelector& sel, const Matrix& noise);
Var concrete_on_tape(Tape& tape, Var log_alpha, const Matrix& noise, double temperature);
// Mean over rows of each row's largest weight.
double mean_row_max(const Matrix& weights);

struct HardenedSelection {
  std::vector<std::size_t> indices;  // distinct, in row order of first occurrence
  std::size_t duplicates = 0;        // rows whose argmax repeated an earlier row
};

// Replaces each row by argmax_j log_alpha(row, j), lowest index on ties.
HardenedSelection concrete_harden(const ConcreteSelector& sel);

}  // namespace cfs
