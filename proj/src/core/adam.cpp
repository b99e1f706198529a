#include "cfs/adam.hpp"

#include "cfs/errors.hpp"

#include <cmath>

namespace cfs {

AdamState::AdamState(AdamConfig config, std::span<Matrix* const> params) : config_(config) {
  for (const Matrix* p : params) {
    first_.push_back(Matrix::Zero(p->rows(), p->cols()));
    second_.push_back(Matrix::Zero(p->rows(), p->cols()));
  }
}

void AdamState::step(std::span<Matrix* const> params, std::span<const Matrix> grads) {
  if (params.size() != first_.size() || grads.size() != params.size()) {
    throw ShapeError("adam: parameter count mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->rows() != first_[i].rows() || params[i]->cols() != first_[i].cols() ||
        grads[i].rows() != first_[i].rows() || grads[i].cols() != first_[i].cols()) {
      throw ShapeError("adam: shape mismatch for parameter " + std::to_string(i));
    }
    if (!grads[i].allFinite()) {
      throw TrainingError("adam: non-finite gradient for parameter " + std::to_string(i),
                          step_ + 1);
    }
  }
  ++step_;
  const double t = static_cast<double>(step_);
  const double bias1 = 1.0 - std::pow(config_.beta1, t);
  const double bias2 = 1.0 - std::pow(config_.beta2, t);
  const double step_size = config_.learning_rate / bias1;
  const double root_bias2 = std::sqrt(bias2);
  for (std::size_t i = 0; i < params.size(); ++i) {
    first_[i] = config_.beta1 * first_[i] + (1.0 - config_.beta1) * grads[i];
    second_[i] = config_.beta2 * second_[i] + (1.0 - config_.beta2) * grads[i].cwiseAbs2();
    const auto denom = (second_[i].array().sqrt() / root_bias2) + config_.epsilon;
    params[i]->array() -= step_size * first_[i].array() / denom;
  }
}

}  // namespace cfs
