#pragma once

#include "cfs/matrix.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace cfs {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias correction, in the form
//   p -= lr * m_hat / (sqrt(v_hat) + eps).
class AdamState {
 public:
  AdamState() = default;
  AdamState(AdamConfig config, std::span<Matrix* const> params);

  // Throws TrainingError (carrying the step index) on a non-finite gradient,
  // before any parameter is touched.
  void step(std::span<Matrix* const> params, std::span<const Matrix> grads);

  std::size_t steps() const { return step_; }
  const AdamConfig& config() const { return config_; }
  void set_learning_rate(double lr) { config_.learning_rate = lr; }

 private:
  AdamConfig config_;
  std::vector<Matrix> first_;
  std::vector<Matrix> second_;
  std::size_t step_ = 0;
};

}  // namespace cfs
