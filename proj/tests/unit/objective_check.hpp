#pragma once

#include "cfs/selectors.hpp"
#include "gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace cfs::testing {

inline TrainConfig tiny_config(std::size_t k = 2, std::size_t l = 2) {
  TrainConfig cfg;
  cfg.k = k;
  cfg.background_dim = l;
  cfg.arch.reconstructor_hidden = 5;
  cfg.arch.encoder_hidden = 4;
  cfg.arch.classifier_hidden = 6;
  cfg.batch_size = 16;
  return cfg;
}

using Params = std::vector<std::pair<std::string, Matrix*>>;

inline Params all_parameters(SelectorModel& m) {
  Params out;
  if (m.gate_kind() == GateKind::Stochastic) {
    out.emplace_back("gates.mu", &m.gates().mu);
  } else {
    out.emplace_back("concrete.log_alpha", &m.concrete().log_alpha);
  }
  for (auto& p : m.reconstructor().named_parameters("f")) out.push_back(p);
  for (auto& p : m.encoder().named_parameters("g")) out.push_back(p);
  for (auto& p : m.decoder().named_parameters("h")) out.push_back(p);
  return out;
}

// Worst relative error between the step's named adjoints and central
// differences of the step's loss. Parameters absent from the step must not
// influence the loss through a gradient path (checked by the caller).
inline double objective_gradient_error(SelectorModel& model, const Matrix& xt, const Matrix* xb,
                                const Matrix& noise) {
  const StepResult step = selector_step(model, xt, xb, noise);
  double worst = 0.0;
  for (auto& [name, param] : all_parameters(model)) {
    bool present = false;
    for (const auto& g : step.grads) present |= g.first == name;
    if (!present) continue;
    // Under stop-gradient the encoder only sees the background term.
    const bool blocked = model.mode() == Mode::StopGrad && name.rfind("g.", 0) == 0;
    auto loss = [&] {
      return blocked ? background_step(model, *xb).loss : selector_step(model, xt, xb, noise).loss;
    };
    Matrix numeric(param->rows(), param->cols());
    for (Eigen::Index i = 0; i < param->size(); ++i) {
      const double keep = param->data()[i];
      param->data()[i] = keep + 1e-5;
      const double up = loss();
      param->data()[i] = keep - 1e-5;
      const double down = loss();
      param->data()[i] = keep;
      numeric.data()[i] = (up - down) / 2e-5;
    }
    worst = std::max(worst, relative_error(step.grad(name), numeric));
  }
  return worst;
}

inline Matrix kink_free_noise(const GateVector& g, Rng& rng) {
  Matrix noise = stg_noise(g.size(), g.sigma, rng);
  for (Eigen::Index i = 0; i < noise.cols(); ++i) {
    for (double kink : {0.0, 1.0}) {
      if (std::abs(g.mu(0, i) + noise(0, i) - kink) < 1e-3) noise(0, i) += 2e-3;
    }
  }
  return noise;
}

// Zero-initialised biases put whole rows exactly on a ReLU kink when a small
// hidden layer is dead; jitter them so finite differences are well defined.
inline void jitter_biases(SelectorModel& m, Rng& rng) {
  for (Mlp* net : {&m.reconstructor(), &m.encoder(), &m.decoder()}) {
    for (Dense& layer : net->layers()) layer.bias = random_matrix(1, layer.bias.cols(), rng, 0.3);
  }
}

}  // namespace cfs::testing
