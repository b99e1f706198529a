#include "cfs/gates.hpp"

#include "cfs/errors.hpp"

#include <algorithm>
#include <cmath>

namespace cfs {

GateVector GateVector::initial(std::size_t d, double sigma, double lambda) {
  GateVector g;
  g.mu = Matrix::Constant(1, static_cast<Eigen::Index>(d), 0.5);
  g.sigma = sigma;
  g.lambda = lambda;
  g.validate();
  return g;
}

void GateVector::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ContractError("gates: sigma must be > 0");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ContractError("gates: lambda must be >= 0");
  if (mu.rows() != 1) throw ShapeError("gates: mu must be a single row");
  if (!mu.allFinite()) throw ContractError("gates: mu must be finite");
}

Matrix stg_noise(std::size_t d, double sigma, Rng& rng) {
  Matrix noise(1, static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < noise.size(); ++i) noise.data()[i] = sigma * rng.normal();
  return noise;
}

Matrix stg_sample_with_noise(const GateVector& gates, const Matrix& noise) {
  gates.validate();
  Tape tape;
  const Var mu = tape.constant(gates.mu);
  return tape.value(stg_gate_on_tape(tape, mu, noise));
}

Matrix stg_sample(const GateVector& gates, Rng& rng) {
  return stg_sample_with_noise(gates, stg_noise(gates.size(), gates.sigma, rng));
}

Matrix stg_gate_deterministic(const GateVector& gates) {
  gates.validate();
  return gates.mu.cwiseMax(0.0).cwiseMin(1.0);
}

double stg_penalty(const GateVector& gates) {
  gates.validate();
  Tape tape;
  const Var mu = tape.constant(gates.mu);
  return tape.value(stg_penalty_on_tape(tape, mu, gates.sigma, gates.lambda))(0, 0);
}

Matrix stg_penalty_grad(const GateVector& gates) {
  gates.validate();
  Matrix g(1, gates.mu.cols());
  for (Eigen::Index i = 0; i < g.cols(); ++i) {
    g(0, i) = gates.lambda * gaussian_pdf(gates.mu(0, i) / gates.sigma) / gates.sigma;
  }
  return g;
}

std::size_t open_gate_count(const GateVector& gates) {
  return static_cast<std::size_t>((gates.mu.array() > 0.0).count());
}

Var stg_gate_on_tape(Tape& tape, Var mu, const Matrix& noise) {
  return tape.clamp01(tape.add(mu, tape.constant(noise)));
}

Var stg_penalty_on_tape(Tape& tape, Var mu, double sigma, double lambda) {
  return tape.scale(tape.gauss_cdf_sum(mu, 1.0 / sigma), lambda);
}

double concrete_schedule(double t0, double tb, std::size_t total_epochs, std::size_t epoch) {
  if (!(t0 > 0.0) || !(tb > 0.0)) throw ContractError("concrete_schedule: temperatures must be > 0");
  if (epoch > total_epochs) throw ContractError("concrete_schedule: epoch beyond schedule end");
  if (total_epochs == 0) return t0;
  if (epoch == total_epochs) return tb;
  const double frac = static_cast<double>(epoch) / static_cast<double>(total_epochs);
  return t0 * std::pow(tb / t0, frac);
}

ConcreteSelector ConcreteSelector::initial(std::size_t k, std::size_t d, Rng& rng, double t0,
                                           double tb, std::size_t total_epochs) {
  if (k == 0 || d == 0) throw ContractError("concrete selector: empty shape");
  ConcreteSelector sel;
  sel.log_alpha.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d));
  const double lo = std::log(1e-2);
  const double hi = std::log(2e-2);
  for (Eigen::Index i = 0; i < sel.log_alpha.size(); ++i) sel.log_alpha.data()[i] = rng.uniform(lo, hi);
  sel.initial_temperature = t0;
  sel.final_temperature = tb;
  sel.total_epochs = total_epochs;
  sel.temperature = t0;
  return sel;
}

void ConcreteSelector::set_epoch(std::size_t epoch) {
  temperature = concrete_schedule(initial_temperature, final_temperature, total_epochs, epoch);
}

Matrix gumbel_noise(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix g(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = rng.gumbel();
  return g;
}

Var concrete_on_tape(Tape& tape, Var log_alpha, const Matrix& noise, double temperature) {
  if (!(temperature > 0.0)) throw ContractError("concrete: temperature must be > 0");
  const Var perturbed = tape.add(log_alpha, tape.constant(noise));
  return tape.row_softmax(tape.scale(perturbed, 1.0 / temperature));
}

Matrix concrete_sample_with_noise(const ConcreteSelector& sel, const Matrix& noise) {
  Tape tape;
  const Var la = tape.constant(sel.log_alpha);
  return tape.value(concrete_on_tape(tape, la, noise, sel.temperature));
}

Matrix concrete_sample(const ConcreteSelector& sel, Rng& rng) {
  return concrete_sample_with_noise(sel, gumbel_noise(sel.rows(), sel.features(), rng));
}

double mean_row_max(const Matrix& weights) {
  if (weights.rows() == 0) return 0.0;
  return weights.rowwise().maxCoeff().mean();
}

HardenedSelection concrete_harden(const ConcreteSelector& sel) {
  HardenedSelection out;
  for (Eigen::Index r = 0; r < sel.log_alpha.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < sel.log_alpha.cols(); ++c) {
      if (sel.log_alpha(r, c) > sel.log_alpha(r, best)) best = c;
    }
    const auto idx = static_cast<std::size_t>(best);
    if (std::find(out.indices.begin(), out.indices.end(), idx) != out.indices.end()) {
      ++out.duplicates;
    } else {
      out.indices.push_back(idx);
    }
  }
  return out;
}

}  // namespace cfs
