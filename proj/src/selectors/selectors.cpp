#include "cfs/selectors.hpp"

#include "cfs/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cfs {

namespace {

using ParamList = std::vector<std::pair<std::string, Matrix*>>;

void append(ParamList& out, ParamList more) {
  for (auto& p : more) out.push_back(std::move(p));
}

std::vector<Matrix*> pointers(const ParamList& params) {
  std::vector<Matrix*> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back(p.second);
  return out;
}

std::vector<Matrix> grads_in_order(const StepResult& step, const ParamList& params) {
  std::vector<Matrix> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back(step.grad(p.first));
  return out;
}

std::vector<std::size_t> hidden_widths(std::size_t in, std::size_t hidden, std::size_t layers,
                                       std::size_t out) {
  std::vector<std::size_t> widths{in};
  for (std::size_t i = 0; i < layers; ++i) widths.push_back(hidden);
  widths.push_back(out);
  return widths;
}

double scalar_of(const Matrix& m) { return m(0, 0); }

// Rows [start, start + count) of a permutation, gathered from data.
Matrix batch_rows(const Matrix& data, const std::vector<std::size_t>& perm, std::size_t start,
                  std::size_t count) {
  return gather_rows(data, std::span<const std::size_t>(perm).subspan(start, count));
}

// Cycles through a reshuffled permutation of background rows.
class BackgroundStream {
 public:
  BackgroundStream(const Matrix& data, Rng& rng) : data_(data), rng_(rng) {
    perm_ = rng_.permutation(static_cast<std::size_t>(data_.rows()));
  }

  Matrix next(std::size_t count) {
    count = std::min(count, perm_.size());
    if (pos_ + count > perm_.size()) {
      perm_ = rng_.permutation(perm_.size());
      pos_ = 0;
    }
    Matrix out = batch_rows(data_, perm_, pos_, count);
    pos_ += count;
    return out;
  }

 private:
  const Matrix& data_;
  Rng& rng_;
  std::vector<std::size_t> perm_;
  std::size_t pos_ = 0;
};

void check_finite_loss(double loss, const std::string& stage, std::size_t step) {
  if (!std::isfinite(loss)) throw TrainingError(stage + ": non-finite loss", step);
}

void require_data(const Matrix& data, std::size_t d, const std::string& what) {
  if (data.rows() == 0) throw DataError(what + " set is empty");
  if (static_cast<std::size_t>(data.cols()) != d) {
    throw ShapeError(what + " set has " + std::to_string(data.cols()) + " features, expected " +
                     std::to_string(d));
  }
  if (!data.allFinite()) throw DataError(what + " set contains non-finite values");
}

Mlp mlp_from_checkpoint(const std::vector<NamedMatrix>& entries, const std::string& prefix) {
  Mlp mlp;
  for (std::size_t i = 0;; ++i) {
    const std::string base = prefix + "." + std::to_string(i);
    const auto has = std::any_of(entries.begin(), entries.end(),
                                 [&](const NamedMatrix& e) { return e.name == base + ".weight"; });
    if (!has) break;
    mlp.layers().push_back(
        Dense{checkpoint_entry(entries, base + ".weight"), checkpoint_entry(entries, base + ".bias")});
  }
  return mlp;
}

Matrix scalar_matrix(double v) { return Matrix::Constant(1, 1, v); }

}  // namespace

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::Pretrained: return "pretrained";
    case Mode::Joint: return "joint";
    case Mode::StopGrad: return "stopgrad";
    case Mode::Cae: return "cae";
    case Mode::StgSupervised: return "stg-supervised";
  }
  return "unknown";
}

Mode parse_mode(const std::string& name) {
  for (Mode m : {Mode::Pretrained, Mode::Joint, Mode::StopGrad, Mode::Cae, Mode::StgSupervised}) {
    if (to_string(m) == name) return m;
  }
  throw ContractError("unknown mode '" + name +
                      "' (expected pretrained, joint, stopgrad, cae or stg-supervised)");
}

bool is_cfs(Mode mode) {
  return mode == Mode::Pretrained || mode == Mode::Joint || mode == Mode::StopGrad;
}

void TrainConfig::validate(std::size_t d) const {
  if (k == 0 || k >= d) {
    throw ContractError("k must satisfy 0 < k < d (k=" + std::to_string(k) +
                        ", d=" + std::to_string(d) + ")");
  }
  if (background_dim == 0) throw ContractError("background dimension must be >= 1");
  if (batch_size == 0) throw ContractError("batch size must be >= 1");
  if (!(sigma > 0.0)) throw ContractError("sigma must be > 0");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ContractError("lambda must be >= 0");
  if (!(learning_rate > 0.0)) throw ContractError("learning rate must be > 0");
  if (!(cae_initial_temperature > 0.0) || !(cae_final_temperature > 0.0)) {
    throw ContractError("concrete temperatures must be > 0");
  }
}

// ---------------------------------------------------------------------------

SelectorModel::SelectorModel(Mode mode, std::size_t d, const TrainConfig& cfg, Rng& rng)
    : mode_(mode), gate_kind_(cfg.gate), d_(d), l_(cfg.background_dim) {
  if (!is_cfs(mode)) throw ContractError("SelectorModel: " + to_string(mode) + " is a baseline mode");
  cfg.validate(d);
  const std::size_t selected_width = gate_kind_ == GateKind::Stochastic ? d : cfg.k;
  f_ = Mlp(hidden_widths(l_ + selected_width, cfg.arch.reconstructor_hidden,
                         cfg.arch.reconstructor_layers, d),
           rng);
  g_ = Mlp(hidden_widths(d, cfg.arch.encoder_hidden, 1, l_), rng);
  h_ = Mlp(hidden_widths(l_, cfg.arch.encoder_hidden, 1, d), rng);
  gates_ = GateVector::initial(d, cfg.sigma, cfg.lambda);
  if (gate_kind_ == GateKind::Concrete) {
    concrete_ = ConcreteSelector::initial(cfg.k, d, rng, cfg.cae_initial_temperature,
                                          cfg.cae_final_temperature,
                                          std::max<std::size_t>(1, cfg.epochs) - 1);
  }
}

Matrix SelectorModel::encode(const Matrix& x) const { return g_.predict(x); }

Matrix SelectorModel::reconstruct(const Matrix& x) const {
  Matrix selected;
  if (gate_kind_ == GateKind::Stochastic) {
    selected = x;
    const Matrix gate = stg_gate_deterministic(gates_);
    for (Eigen::Index r = 0; r < selected.rows(); ++r) selected.row(r).array() *= gate.row(0).array();
  } else {
    const HardenedSelection hard = concrete_harden(concrete_);
    Matrix onehot = Matrix::Zero(concrete_.log_alpha.rows(), concrete_.log_alpha.cols());
    for (Eigen::Index r = 0; r < onehot.rows(); ++r) {
      Eigen::Index best = 0;
      concrete_.log_alpha.row(r).maxCoeff(&best);
      onehot(r, best) = 1.0;
    }
    selected = matmul(x, onehot.transpose());
  }
  Matrix input(x.rows(), static_cast<Eigen::Index>(l_) + selected.cols());
  input.leftCols(static_cast<Eigen::Index>(l_)) = encode(x);
  input.rightCols(selected.cols()) = selected;
  return f_.predict(input);
}

std::vector<NamedMatrix> SelectorModel::to_checkpoint() const {
  std::vector<NamedMatrix> out;
  out.push_back({"meta.mode", scalar_matrix(static_cast<double>(mode_))});
  out.push_back({"meta.gate_kind", scalar_matrix(static_cast<double>(gate_kind_))});
  out.push_back({"meta.background_ready", scalar_matrix(background_ready_ ? 1.0 : 0.0)});
  out.push_back({"meta.sigma", scalar_matrix(gates_.sigma)});
  out.push_back({"meta.lambda", scalar_matrix(gates_.lambda)});
  out.push_back({"gates.mu", gates_.mu});
  if (gate_kind_ == GateKind::Concrete) {
    out.push_back({"concrete.log_alpha", concrete_.log_alpha});
    out.push_back({"concrete.temperature", scalar_matrix(concrete_.temperature)});
  }
  for (const auto& [name, value] : f_.named_parameters("f")) out.push_back({name, *value});
  for (const auto& [name, value] : g_.named_parameters("g")) out.push_back({name, *value});
  for (const auto& [name, value] : h_.named_parameters("h")) out.push_back({name, *value});
  return out;
}

SelectorModel SelectorModel::from_checkpoint(const std::vector<NamedMatrix>& entries) {
  SelectorModel m;
  const auto mode_code = static_cast<int>(scalar_of(checkpoint_entry(entries, "meta.mode")));
  if (mode_code < 0 || mode_code > static_cast<int>(Mode::StopGrad)) {
    throw DataError("checkpoint: not a CFS selector model");
  }
  m.mode_ = static_cast<Mode>(mode_code);
  m.gate_kind_ = scalar_of(checkpoint_entry(entries, "meta.gate_kind")) == 0.0
                     ? GateKind::Stochastic
                     : GateKind::Concrete;
  m.background_ready_ = scalar_of(checkpoint_entry(entries, "meta.background_ready")) != 0.0;
  m.gates_.mu = checkpoint_entry(entries, "gates.mu");
  m.gates_.sigma = scalar_of(checkpoint_entry(entries, "meta.sigma"));
  m.gates_.lambda = scalar_of(checkpoint_entry(entries, "meta.lambda"));
  m.gates_.validate();
  if (m.gate_kind_ == GateKind::Concrete) {
    m.concrete_.log_alpha = checkpoint_entry(entries, "concrete.log_alpha");
    m.concrete_.temperature = scalar_of(checkpoint_entry(entries, "concrete.temperature"));
  }
  m.f_ = mlp_from_checkpoint(entries, "f");
  m.g_ = mlp_from_checkpoint(entries, "g");
  m.h_ = mlp_from_checkpoint(entries, "h");
  if (m.f_.depth() == 0 || m.g_.depth() == 0 || m.h_.depth() == 0) {
    throw DataError("checkpoint: missing network layers");
  }
  m.d_ = m.g_.input_width();
  m.l_ = m.g_.output_width();
  return m;
}

// ---------------------------------------------------------------------------

const Matrix& StepResult::grad(const std::string& name) const {
  for (const auto& [n, g] : grads) {
    if (n == name) return g;
  }
  throw ContractError("no gradient named '" + name + "'");
}

namespace {

ParamList background_parameters(SelectorModel& model) {
  ParamList out = model.encoder().named_parameters("g");
  append(out, model.decoder().named_parameters("h"));
  return out;
}

ParamList selector_parameters(SelectorModel& model) {
  ParamList out;
  if (model.gate_kind() == GateKind::Stochastic) {
    out.emplace_back("gates.mu", &model.gates().mu);
  } else {
    out.emplace_back("concrete.log_alpha", &model.concrete().log_alpha);
  }
  append(out, model.reconstructor().named_parameters("f"));
  if (model.mode() != Mode::Pretrained) append(out, background_parameters(model));
  return out;
}

void collect(StepResult& out, const Tape& tape, const Mlp& mlp, const std::string& prefix,
             const std::vector<Var>& bound) {
  const auto names = mlp.named_parameters(prefix);
  for (std::size_t i = 0; i < names.size(); ++i) out.grads.emplace_back(names[i].first, tape.grad(bound[i]));
}

}  // namespace

StepResult background_step(const SelectorModel& model, const Matrix& batch) {
  Tape tape;
  const auto gv = model.encoder().bind(tape, true);
  const auto hv = model.decoder().bind(tape, true);
  const Var x = tape.constant(batch);
  const Var rec = model.decoder().forward(tape, model.encoder().forward(tape, x, gv), hv);
  const Var loss = tape.scale(tape.mean_square(rec, x), static_cast<double>(batch.cols()));
  tape.backward(loss);
  StepResult out;
  out.loss = scalar_of(tape.value(loss));
  collect(out, tape, model.encoder(), "g", gv);
  collect(out, tape, model.decoder(), "h", hv);
  return out;
}

StepResult selector_step(const SelectorModel& model, const Matrix& target_batch,
                         const Matrix* background_batch, const Matrix& gate_noise) {
  const Mode mode = model.mode();
  if (mode == Mode::Pretrained && !model.background_ready()) {
    throw ContractError("pretrained mode: run pretrain_background before train_selector");
  }
  const auto d = static_cast<double>(model.features());
  Tape tape;
  const auto fv = model.reconstructor().bind(tape, true);
  const Var xt = tape.constant(target_batch);

  std::vector<Var> gv;
  Var b;
  if (mode == Mode::Pretrained) {
    b = tape.constant(model.encode(target_batch));
  } else {
    gv = model.encoder().bind(tape, true);
    b = model.encoder().forward(tape, xt, gv);
    if (mode == Mode::StopGrad) b = tape.stop_gradient(b);
  }

  Var selection_param;
  Var selected;
  Var loss;
  if (model.gate_kind() == GateKind::Stochastic) {
    selection_param = tape.leaf(model.gates().mu, true);
    const Var gate = stg_gate_on_tape(tape, selection_param, gate_noise);
    selected = tape.mul_row(xt, gate);
  } else {
    selection_param = tape.leaf(model.concrete().log_alpha, true);
    const Var weights =
        concrete_on_tape(tape, selection_param, gate_noise, model.concrete().temperature);
    selected = tape.matmul(xt, tape.transpose(weights));
  }
  const Var out = model.reconstructor().forward(tape, tape.concat_cols(b, selected), fv);
  loss = tape.scale(tape.mean_square(out, xt), d);
  if (model.gate_kind() == GateKind::Stochastic) {
    loss = tape.add(loss, stg_penalty_on_tape(tape, selection_param, model.gates().sigma,
                                              model.gates().lambda));
  }

  std::vector<Var> hv;
  if (mode != Mode::Pretrained) {
    hv = model.decoder().bind(tape, true);
    if (background_batch != nullptr) {
      const Var xb = tape.constant(*background_batch);
      const Var rec = model.decoder().forward(tape, model.encoder().forward(tape, xb, gv), hv);
      loss = tape.add(loss, tape.scale(tape.mean_square(rec, xb), d));
    }
  }

  tape.backward(loss);
  StepResult result;
  result.loss = scalar_of(tape.value(loss));
  result.grads.emplace_back(
      model.gate_kind() == GateKind::Stochastic ? "gates.mu" : "concrete.log_alpha",
      tape.grad(selection_param));
  collect(result, tape, model.reconstructor(), "f", fv);
  if (mode != Mode::Pretrained) {
    collect(result, tape, model.encoder(), "g", gv);
    collect(result, tape, model.decoder(), "h", hv);
  }
  return result;
}

std::vector<EpochLog> pretrain_background(SelectorModel& model, const Matrix& background,
                                          const TrainConfig& cfg, Rng& rng) {
  require_data(background, model.features(), "background");
  const ParamList params = background_parameters(model);
  const auto ptrs = pointers(params);
  AdamState adam(AdamConfig{.learning_rate = cfg.learning_rate}, ptrs);
  const auto m = static_cast<std::size_t>(background.rows());
  std::vector<EpochLog> log;
  for (std::size_t epoch = 0; epoch < cfg.pretrain_epochs; ++epoch) {
    const auto perm = rng.permutation(m);
    double total = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < m; start += cfg.batch_size) {
      const Matrix batch = batch_rows(background, perm, start, std::min(cfg.batch_size, m - start));
      const StepResult step = background_step(model, batch);
      check_finite_loss(step.loss, "background pretraining", adam.steps() + 1);
      adam.step(ptrs, grads_in_order(step, params));
      total += step.loss;
      ++batches;
    }
    log.push_back({"background", epoch, total / static_cast<double>(batches), 0, 0.0});
  }
  model.set_background_ready(true);
  return log;
}

std::vector<EpochLog> train_selector(SelectorModel& model, const Matrix& target,
                                     const Matrix* background, const TrainConfig& cfg, Rng& rng) {
  require_data(target, model.features(), "target");
  const Mode mode = model.mode();
  if (mode == Mode::Pretrained && !model.background_ready()) {
    throw ContractError("pretrained mode: run pretrain_background before train_selector");
  }
  if (mode != Mode::Pretrained) {
    if (background == nullptr) {
      throw ContractError(to_string(mode) + " mode: background data must be supplied");
    }
    require_data(*background, model.features(), "background");
  }
  model.gates().lambda = cfg.lambda;
  model.gates().sigma = cfg.sigma;
  model.gates().validate();

  const ParamList params = selector_parameters(model);
  const auto ptrs = pointers(params);
  AdamState adam(AdamConfig{.learning_rate = cfg.learning_rate}, ptrs);
  const auto n = static_cast<std::size_t>(target.rows());
  std::optional<BackgroundStream> bg;
  if (mode != Mode::Pretrained) bg.emplace(*background, rng);

  std::vector<EpochLog> log;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (model.gate_kind() == GateKind::Concrete) model.concrete().set_epoch(epoch);
    const auto perm = rng.permutation(n);
    double total = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t count = std::min(cfg.batch_size, n - start);
      const Matrix batch = batch_rows(target, perm, start, count);
      std::optional<Matrix> bg_batch;
      if (bg) bg_batch = bg->next(count);
      const Matrix noise = model.gate_kind() == GateKind::Stochastic
                               ? stg_noise(model.features(), model.gates().sigma, rng)
                               : gumbel_noise(model.concrete().rows(), model.features(), rng);
      const StepResult step =
          selector_step(model, batch, bg_batch ? &*bg_batch : nullptr, noise);
      check_finite_loss(step.loss, "selector training", adam.steps() + 1);
      adam.step(ptrs, grads_in_order(step, params));
      total += step.loss;
      ++batches;
    }
    log.push_back({"selector", epoch, total / static_cast<double>(batches),
                   open_gate_count(model.gates()),
                   model.gate_kind() == GateKind::Concrete ? model.concrete().temperature : 0.0});
  }
  return log;
}

FeatureSet select_top_k(const GateVector& gates, std::size_t k) {
  const std::size_t d = gates.size();
  if (k > d) {
    throw ContractError("select_top_k: k=" + std::to_string(k) + " exceeds d=" + std::to_string(d));
  }
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return gates.mu(0, static_cast<Eigen::Index>(a)) > gates.mu(0, static_cast<Eigen::Index>(b));
  });
  order.resize(k);
  std::vector<double> mu(gates.mu.data(), gates.mu.data() + gates.mu.size());
  return FeatureSet::from_indices(std::move(order), std::move(mu));
}

FeatureSet extract_features(const SelectorModel& model, std::size_t k) {
  if (model.gate_kind() == GateKind::Stochastic) return select_top_k(model.gates(), k);
  return FeatureSet::from_indices(concrete_harden(model.concrete()).indices);
}

// ---------------------------------------------------------------------------

LambdaSearchResult tune_lambda(const std::function<std::size_t(double)>& open_count_for,
                               std::size_t target_k, double lambda_lo, double lambda_hi,
                               std::size_t max_probes) {
  if (!(lambda_lo > 0.0) || !(lambda_hi > lambda_lo)) {
    throw ContractError("tune_lambda: need 0 < lambda_lo < lambda_hi");
  }
  LambdaSearchResult result;
  const double tolerance = 0.1 * static_cast<double>(target_k);
  auto within = [&](std::size_t count) {
    return std::abs(static_cast<double>(count) - static_cast<double>(target_k)) <= tolerance;
  };
  auto probe = [&](double lambda) {
    const std::size_t count = open_count_for(lambda);
    result.probes.push_back({lambda, count});
    return count;
  };
  auto finish = [&](double lambda, std::size_t count, bool ok) {
    result.lambda = lambda;
    result.open_gates = count;
    result.within_tolerance = ok;
    return result;
  };
  auto describe = [&] {
    std::string msg = "tune_lambda: bounds do not bracket k=" + std::to_string(target_k) + "; probes:";
    for (const auto& p : result.probes) {
      msg += " (" + std::to_string(p.lambda) + " -> " + std::to_string(p.open_gates) + ")";
    }
    return msg;
  };

  std::size_t lo_count = probe(lambda_lo);
  if (within(lo_count)) return finish(lambda_lo, lo_count, true);
  std::size_t hi_count = probe(lambda_hi);
  if (within(hi_count)) return finish(lambda_hi, hi_count, true);
  while (lo_count < target_k && result.probes.size() < max_probes) {
    lambda_lo /= 10.0;
    lo_count = probe(lambda_lo);
    if (within(lo_count)) return finish(lambda_lo, lo_count, true);
  }
  while (hi_count > target_k && result.probes.size() < max_probes) {
    lambda_hi *= 10.0;
    hi_count = probe(lambda_hi);
    if (within(hi_count)) return finish(lambda_hi, hi_count, true);
  }
  if (lo_count < target_k || hi_count > target_k) throw LambdaSearchError(describe());

  while (result.probes.size() < max_probes) {
    const double mid = std::sqrt(lambda_lo * lambda_hi);
    const std::size_t count = probe(mid);
    if (within(count)) return finish(mid, count, true);
    if (count > target_k) {
      lambda_lo = mid;
    } else {
      lambda_hi = mid;
    }
  }
  const auto best = std::min_element(
      result.probes.begin(), result.probes.end(), [&](const LambdaProbe& a, const LambdaProbe& b) {
        return std::abs(static_cast<double>(a.open_gates) - static_cast<double>(target_k)) <
               std::abs(static_cast<double>(b.open_gates) - static_cast<double>(target_k));
      });
  return finish(best->lambda, best->open_gates, false);
}

// ---------------------------------------------------------------------------

CaeResult train_cae_baseline(const Matrix& data, const TrainConfig& cfg, Rng& rng) {
  const auto d = static_cast<std::size_t>(data.cols());
  require_data(data, d, "target");
  cfg.validate(d);
  CaeResult result;
  const std::size_t epochs = std::max<std::size_t>(cfg.cae_epochs, 1);
  result.selector = ConcreteSelector::initial(cfg.k, d, rng, cfg.cae_initial_temperature,
                                              cfg.cae_final_temperature, epochs - 1);
  result.reconstructor = Mlp(hidden_widths(cfg.k, cfg.arch.reconstructor_hidden,
                                           cfg.arch.reconstructor_layers, d),
                             rng);
  ParamList params{{"concrete.log_alpha", &result.selector.log_alpha}};
  append(params, result.reconstructor.named_parameters("f"));
  const auto ptrs = pointers(params);
  AdamState adam(AdamConfig{.learning_rate = cfg.learning_rate}, ptrs);
  const auto n = static_cast<std::size_t>(data.rows());

  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    result.selector.set_epoch(epoch);
    const auto perm = rng.permutation(n);
    double total = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const Matrix batch = batch_rows(data, perm, start, std::min(cfg.batch_size, n - start));
      const Matrix noise = gumbel_noise(cfg.k, d, rng);
      Tape tape;
      const Var la = tape.leaf(result.selector.log_alpha, true);
      const auto fv = result.reconstructor.bind(tape, true);
      const Var x = tape.constant(batch);
      const Var weights = concrete_on_tape(tape, la, noise, result.selector.temperature);
      const Var out = result.reconstructor.forward(tape, tape.matmul(x, tape.transpose(weights)), fv);
      const Var loss = tape.scale(tape.mean_square(out, x), static_cast<double>(d));
      tape.backward(loss);
      StepResult step;
      step.loss = scalar_of(tape.value(loss));
      step.grads.emplace_back("concrete.log_alpha", tape.grad(la));
      collect(step, tape, result.reconstructor, "f", fv);
      check_finite_loss(step.loss, "concrete autoencoder", adam.steps() + 1);
      adam.step(ptrs, grads_in_order(step, params));
      total += step.loss;
      ++batches;
    }
    result.log.push_back(
        {"cae", epoch, total / static_cast<double>(batches), 0, result.selector.temperature});
    if (mean_row_max(concrete_sample(result.selector, rng)) > 0.99) {
      result.converged = true;
      break;
    }
  }
  result.hardened = concrete_harden(result.selector);
  return result;
}

StgSupervisedResult train_stg_supervised_baseline(const Matrix& target, const Matrix& background,
                                                  const TrainConfig& cfg, Rng& rng) {
  const auto d = static_cast<std::size_t>(target.cols());
  require_data(target, d, "target");
  require_data(background, d, "background");
  cfg.validate(d);
  Matrix x(target.rows() + background.rows(), target.cols());
  x.topRows(target.rows()) = target;
  x.bottomRows(background.rows()) = background;
  Matrix labels(x.rows(), 1);
  labels.topRows(target.rows()).setOnes();
  labels.bottomRows(background.rows()).setZero();

  StgSupervisedResult result;
  result.gates = GateVector::initial(d, cfg.sigma, cfg.lambda);
  result.classifier = Mlp(
      hidden_widths(d, cfg.arch.classifier_hidden, 2, 1), rng);
  ParamList params{{"gates.mu", &result.gates.mu}};
  append(params, result.classifier.named_parameters("c"));
  const auto ptrs = pointers(params);
  AdamState adam(AdamConfig{.learning_rate = cfg.learning_rate}, ptrs);
  const auto n = static_cast<std::size_t>(x.rows());

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto perm = rng.permutation(n);
    double total = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t count = std::min(cfg.batch_size, n - start);
      const auto rows = std::span<const std::size_t>(perm).subspan(start, count);
      Tape tape;
      const Var mu = tape.leaf(result.gates.mu, true);
      const auto cv = result.classifier.bind(tape, true);
      const Var xb = tape.constant(gather_rows(x, rows));
      const Var yb = tape.constant(gather_rows(labels, rows));
      const Var gate = stg_gate_on_tape(tape, mu, stg_noise(d, cfg.sigma, rng));
      const Var logits = result.classifier.forward(tape, tape.mul_row(xb, gate), cv);
      const Var loss = tape.add(tape.bce_with_logits(logits, yb),
                                stg_penalty_on_tape(tape, mu, cfg.sigma, cfg.lambda));
      tape.backward(loss);
      StepResult step;
      step.loss = scalar_of(tape.value(loss));
      step.grads.emplace_back("gates.mu", tape.grad(mu));
      collect(step, tape, result.classifier, "c", cv);
      check_finite_loss(step.loss, "supervised gates", adam.steps() + 1);
      adam.step(ptrs, grads_in_order(step, params));
      total += step.loss;
      ++batches;
    }
    result.log.push_back({"stg-supervised", epoch, total / static_cast<double>(batches),
                          open_gate_count(result.gates), 0.0});
  }
  const Matrix logits = stg_supervised_logits(result, x);
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    if ((logits(i, 0) > 0.0) == (labels(i, 0) > 0.5)) ++correct;
  }
  result.train_accuracy = static_cast<double>(correct) / static_cast<double>(logits.rows());
  result.features = select_top_k(result.gates, cfg.k);
  return result;
}

Matrix stg_supervised_logits(const StgSupervisedResult& model, const Matrix& x) {
  Matrix gated = x;
  const Matrix gate = stg_gate_deterministic(model.gates);
  for (Eigen::Index r = 0; r < gated.rows(); ++r) gated.row(r).array() *= gate.row(0).array();
  return model.classifier.predict(gated);
}

// ---------------------------------------------------------------------------

MethodRun run_method(Mode mode, const Matrix& target, const Matrix& background,
                     const TrainConfig& cfg, Rng& rng) {
  const auto d = static_cast<std::size_t>(target.cols());
  cfg.validate(d);
  MethodRun run;
  run.mode = mode;
  auto append_log = [&](std::vector<EpochLog> more) {
    run.log.insert(run.log.end(), more.begin(), more.end());
  };
  switch (mode) {
    case Mode::Pretrained:
    case Mode::Joint:
    case Mode::StopGrad: {
      SelectorModel model(mode, d, cfg, rng);
      if (mode == Mode::Pretrained) {
        append_log(pretrain_background(model, background, cfg, rng));
        append_log(train_selector(model, target, nullptr, cfg, rng));
      } else {
        append_log(train_selector(model, target, &background, cfg, rng));
      }
      run.features = extract_features(model, cfg.k);
      run.checkpoint = model.to_checkpoint();
      if (model.gate_kind() == GateKind::Concrete) {
        run.duplicates = concrete_harden(model.concrete()).duplicates;
      }
      return run;
    }
    case Mode::Cae: {
      CaeResult cae = train_cae_baseline(target, cfg, rng);
      run.features = FeatureSet::from_indices(cae.hardened.indices);
      run.duplicates = cae.hardened.duplicates;
      run.converged = cae.converged;
      run.log = std::move(cae.log);
      run.checkpoint.push_back({"meta.mode", scalar_matrix(static_cast<double>(mode))});
      run.checkpoint.push_back({"concrete.log_alpha", cae.selector.log_alpha});
      run.checkpoint.push_back({"concrete.temperature", scalar_matrix(cae.selector.temperature)});
      for (const auto& [name, value] : cae.reconstructor.named_parameters("f")) {
        run.checkpoint.push_back({name, *value});
      }
      return run;
    }
    case Mode::StgSupervised: {
      StgSupervisedResult stg = train_stg_supervised_baseline(target, background, cfg, rng);
      run.features = stg.features;
      run.log = std::move(stg.log);
      run.checkpoint.push_back({"meta.mode", scalar_matrix(static_cast<double>(mode))});
      run.checkpoint.push_back({"meta.sigma", scalar_matrix(stg.gates.sigma)});
      run.checkpoint.push_back({"meta.lambda", scalar_matrix(stg.gates.lambda)});
      run.checkpoint.push_back({"gates.mu", stg.gates.mu});
      for (const auto& [name, value] : stg.classifier.named_parameters("c")) {
        run.checkpoint.push_back({name, *value});
      }
      return run;
    }
  }
  throw ContractError("run_method: unknown mode");
}

FeatureSet features_from_checkpoint(const std::vector<NamedMatrix>& entries, std::size_t k) {
  const auto code = static_cast<int>(scalar_of(checkpoint_entry(entries, "meta.mode")));
  if (code < 0 || code > static_cast<int>(Mode::StgSupervised)) {
    throw DataError("checkpoint: unknown meta.mode " + std::to_string(code));
  }
  const auto mode = static_cast<Mode>(code);
  if (is_cfs(mode)) {
    const SelectorModel model = SelectorModel::from_checkpoint(entries);
    if (k == 0 || k > model.features()) throw ContractError("select: k must be in [1, d]");
    return extract_features(model, k);
  }
  if (mode == Mode::Cae) {
    ConcreteSelector sel;
    sel.log_alpha = checkpoint_entry(entries, "concrete.log_alpha");
    return FeatureSet::from_indices(concrete_harden(sel).indices);
  }
  GateVector gates;
  gates.mu = checkpoint_entry(entries, "gates.mu");
  gates.sigma = scalar_of(checkpoint_entry(entries, "meta.sigma"));
  gates.lambda = scalar_of(checkpoint_entry(entries, "meta.lambda"));
  gates.validate();
  return select_top_k(gates, k);
}

}  // namespace cfs
