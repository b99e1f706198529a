#pragma once

#include "cfs/matrix.hpp"
#include "cfs/rng.hpp"
#include "cfs/tape.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cfs {

// Fully connected layer: y = x W + b, W is in x out, b is 1 x out.
struct Dense {
  Matrix weight;
  Matrix bias;
};

// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero bias.
Dense glorot_dense(std::size_t fan_in, std::size_t fan_out, Rng& rng);

// Multilayer perceptron with ReLU between layers and a linear output.
class Mlp {
 public:
  Mlp() = default;
  // widths = {input, hidden..., output}; at least two entries.
  Mlp(std::span<const std::size_t> widths, Rng& rng);

  std::size_t input_width() const;
  std::size_t output_width() const;
  std::size_t depth() const { return layers_.size(); }

  // Records the parameters on the tape as [W0, b0, W1, b1, ...].
  std::vector<Var> bind(Tape& tape, bool trainable) const;
  Var forward(Tape& tape, Var input, std::span<const Var> bound) const;

  // Tape-free evaluation; same arithmetic as forward().
  Matrix predict(const Matrix& input) const;

  std::vector<Matrix*> parameters();
  std::vector<std::pair<std::string, const Matrix*>> named_parameters(const std::string& prefix) const;
  std::vector<std::pair<std::string, Matrix*>> named_parameters(const std::string& prefix);

  std::vector<Dense>& layers() { return layers_; }
  const std::vector<Dense>& layers() const { return layers_; }

 private:
  std::vector<Dense> layers_;
};

}  // namespace cfs
