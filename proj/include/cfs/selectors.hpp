#pragma once

#include "cfs/adam.hpp"
#include "cfs/checkpoint.hpp"
#include "cfs/feature_set.hpp"
#include "cfs/gates.hpp"
#include "cfs/matrix.hpp"
#include "cfs/mlp.hpp"
#include "cfs/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cfs {

// pretrained: g/h fitted on background data first, g frozen while the gates
//             and f are fitted on target data.
// joint:      one objective, the sum of the target and background terms; g
//             receives gradient from both.
// stopgrad:   as joint, but g(x_target) is gradient-blocked so g learns from
//             background data only.
// cae:        unsupervised concrete autoencoder baseline.
// stg-supervised: gates + classifier separating target from background.
enum class Mode { Pretrained, Joint, StopGrad, Cae, StgSupervised };

std::string to_string(Mode mode);
// Accepts the names above; throws ContractError otherwise.
Mode parse_mode(const std::string& name);
bool is_cfs(Mode mode);

enum class GateKind { Stochastic, Concrete };

struct Architecture {
  std::size_t reconstructor_hidden = 512;  // f: two hidden layers
  std::size_t reconstructor_layers = 2;
  std::size_t encoder_hidden = 128;        // g and h: one hidden layer each
  std::size_t classifier_hidden = 512;     // supervised STG: two hidden layers
};

struct TrainConfig {
  std::size_t k = 20;
  std::size_t background_dim = 20;
  double lambda = 0.1;
  double sigma = 0.5;
  std::size_t epochs = 100;           // selector stage / classifier
  std::size_t pretrain_epochs = 100;  // background autoencoder stage
  std::size_t cae_epochs = 200;
  double cae_initial_temperature = 10.0;
  double cae_final_temperature = 0.1;
  double learning_rate = 1e-3;
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;
  GateKind gate = GateKind::Stochastic;
  Architecture arch;

  // Throws ContractError when k >= d, background_dim == 0, batch_size == 0, ...
  void validate(std::size_t d) const;
};

struct EpochLog {
  std::string stage;
  std::size_t epoch = 0;
  double loss = 0.0;
  std::size_t open_gates = 0;
  double temperature = 0.0;
};

// Networks f (reconstructor), g (background encoder), h (background decoder)
// plus the selection layer.
class SelectorModel {
 public:
  SelectorModel() = default;
  SelectorModel(Mode mode, std::size_t d, const TrainConfig& cfg, Rng& rng);

  Mode mode() const { return mode_; }
  GateKind gate_kind() const { return gate_kind_; }
  std::size_t features() const { return d_; }
  std::size_t background_dim() const { return l_; }
  bool background_ready() const { return background_ready_; }

  Mlp& reconstructor() { return f_; }
  const Mlp& reconstructor() const { return f_; }
  Mlp& encoder() { return g_; }
  const Mlp& encoder() const { return g_; }
  Mlp& decoder() { return h_; }
  const Mlp& decoder() const { return h_; }
  GateVector& gates() { return gates_; }
  const GateVector& gates() const { return gates_; }
  ConcreteSelector& concrete() { return concrete_; }
  const ConcreteSelector& concrete() const { return concrete_; }

  // b = g(x)
  Matrix encode(const Matrix& x) const;
  // Evaluation-time reconstruction f(b, x * clamp(mu)) (no gate noise).
  Matrix reconstruct(const Matrix& x) const;

  void set_background_ready(bool ready) { background_ready_ = ready; }

  std::vector<NamedMatrix> to_checkpoint() const;
  static SelectorModel from_checkpoint(const std::vector<NamedMatrix>& entries);

 private:

  Mode mode_ = Mode::Pretrained;
  GateKind gate_kind_ = GateKind::Stochastic;
  std::size_t d_ = 0;
  std::size_t l_ = 0;
  Mlp f_;
  Mlp g_;
  Mlp h_;
  GateVector gates_;
  ConcreteSelector concrete_;
  bool background_ready_ = false;
};

// Loss and named gradients of one optimization step; exposed so tests can
// inspect adjoints directly.
struct StepResult {
  double loss = 0.0;
  std::vector<std::pair<std::string, Matrix>> grads;

  const Matrix& grad(const std::string& name) const;
};

// Background autoencoder objective d * mse(h(g(x)), x) over a batch.
StepResult background_step(const SelectorModel& model, const Matrix& background_batch);

// Selector objective for the model's mode. background_batch may be null, in
// which case the background term is omitted. gate_noise is 1 x d for
// stochastic gates or k x d Gumbel noise for a concrete layer.
StepResult selector_step(const SelectorModel& model, const Matrix& target_batch,
                         const Matrix* background_batch, const Matrix& gate_noise);

// Fits g and h on background rows. Throws DataError on an empty set and
// TrainingError on a non-finite loss.
std::vector<EpochLog> pretrain_background(SelectorModel& model, const Matrix& background,
                                          const TrainConfig& cfg, Rng& rng);

// Fits the selection layer and f (and g in joint/stopgrad modes).
std::vector<EpochLog> train_selector(SelectorModel& model, const Matrix& target,
                                     const Matrix* background, const TrainConfig& cfg, Rng& rng);

// Indices of the k largest gate means, lowest index first on ties.
FeatureSet select_top_k(const GateVector& gates, std::size_t k);

// Selection from a trained model: top-k gate means, or the hardened concrete
// layer.
FeatureSet extract_features(const SelectorModel& model, std::size_t k);

class LambdaSearchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LambdaProbe {
  double lambda = 0.0;
  std::size_t open_gates = 0;
};

struct LambdaSearchResult {
  double lambda = 0.0;
  std::size_t open_gates = 0;
  bool within_tolerance = false;  // |count - target| <= 10% of target
  std::vector<LambdaProbe> probes;
};

// Bisection on log(lambda) with at most `max_probes` calls to
// `open_count_for`. Bounds are widened tenfold while they fail to bracket the
// target; if they still do not, throws LambdaSearchError with every probe.
LambdaSearchResult tune_lambda(const std::function<std::size_t(double)>& open_count_for,
                               std::size_t target_k, double lambda_lo, double lambda_hi,
                               std::size_t max_probes = 12);

struct CaeResult {
  ConcreteSelector selector;
  Mlp reconstructor;
  HardenedSelection hardened;
  bool converged = false;  // mean per-row max of the concrete sample exceeded 0.99
  std::vector<EpochLog> log;
};

CaeResult train_cae_baseline(const Matrix& data, const TrainConfig& cfg, Rng& rng);

struct StgSupervisedResult {
  GateVector gates;
  Mlp classifier;
  FeatureSet features;
  double train_accuracy = 0.0;
  std::vector<EpochLog> log;
};

// Throws DataError if either dataset is empty.
StgSupervisedResult train_stg_supervised_baseline(const Matrix& target, const Matrix& background,
                                                  const TrainConfig& cfg, Rng& rng);

// Classifier logits for rows of x gated by clamp(mu).
Matrix stg_supervised_logits(const StgSupervisedResult& model, const Matrix& x);

// ---- uniform entry point ----------------------------------------------------

// Everything a single training run produces, whichever method ran.
struct MethodRun {
  Mode mode = Mode::Pretrained;
  FeatureSet features;
  std::vector<EpochLog> log;
  std::vector<NamedMatrix> checkpoint;  // always carries meta.mode
  std::size_t duplicates = 0;           // concrete rows that collapsed onto one feature
  bool converged = true;                // false when a CAE missed its stopping rule
};

// Trains `mode` on target rows (and background rows where the method uses
// them) and extracts k features. Labels are never seen.
MethodRun run_method(Mode mode, const Matrix& target, const Matrix& background,
                     const TrainConfig& cfg, Rng& rng);

// Re-extracts a FeatureSet of size k from a checkpoint written by run_method.
FeatureSet features_from_checkpoint(const std::vector<NamedMatrix>& entries, std::size_t k);

}  // namespace cfs
