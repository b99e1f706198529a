#include "cfs/mlp.hpp"

#include "cfs/errors.hpp"

#include <cmath>

namespace cfs {

Dense glorot_dense(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Dense layer;
  layer.weight.resize(static_cast<Eigen::Index>(fan_in), static_cast<Eigen::Index>(fan_out));
  for (Eigen::Index i = 0; i < layer.weight.size(); ++i) {
    layer.weight.data()[i] = rng.uniform(-limit, limit);
  }
  layer.bias = Matrix::Zero(1, static_cast<Eigen::Index>(fan_out));
  return layer;
}

Mlp::Mlp(std::span<const std::size_t> widths, Rng& rng) {
  if (widths.size() < 2) throw ContractError("Mlp: need input and output widths");
  for (std::size_t w : widths) {
    if (w == 0) throw ContractError("Mlp: zero-width layer");
  }
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    layers_.push_back(glorot_dense(widths[i], widths[i + 1], rng));
  }
}

std::size_t Mlp::input_width() const {
  return layers_.empty() ? 0 : static_cast<std::size_t>(layers_.front().weight.rows());
}

std::size_t Mlp::output_width() const {
  return layers_.empty() ? 0 : static_cast<std::size_t>(layers_.back().weight.cols());
}

std::vector<Var> Mlp::bind(Tape& tape, bool trainable) const {
  std::vector<Var> vars;
  vars.reserve(2 * layers_.size());
  for (const Dense& layer : layers_) {
    vars.push_back(tape.leaf(layer.weight, trainable));
    vars.push_back(tape.leaf(layer.bias, trainable));
  }
  return vars;
}

Var Mlp::forward(Tape& tape, Var input, std::span<const Var> bound) const {
  if (bound.size() != 2 * layers_.size()) throw ContractError("Mlp::forward: wrong binding");
  Var h = input;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = tape.add_row(tape.matmul(h, bound[2 * i]), bound[2 * i + 1]);
    if (i + 1 < layers_.size()) h = tape.relu(h);
  }
  return h;
}

Matrix Mlp::predict(const Matrix& input) const {
  Matrix h = input;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Matrix z = matmul(h, layers_[i].weight);
    z.rowwise() += layers_[i].bias.row(0);
    h = i + 1 < layers_.size() ? Matrix(z.cwiseMax(0.0)) : std::move(z);
  }
  return h;
}

std::vector<Matrix*> Mlp::parameters() {
  std::vector<Matrix*> out;
  for (Dense& layer : layers_) {
    out.push_back(&layer.weight);
    out.push_back(&layer.bias);
  }
  return out;
}

std::vector<std::pair<std::string, const Matrix*>> Mlp::named_parameters(
    const std::string& prefix) const {
  std::vector<std::pair<std::string, const Matrix*>> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    out.emplace_back(prefix + "." + std::to_string(i) + ".weight", &layers_[i].weight);
    out.emplace_back(prefix + "." + std::to_string(i) + ".bias", &layers_[i].bias);
  }
  return out;
}

std::vector<std::pair<std::string, Matrix*>> Mlp::named_parameters(const std::string& prefix) {
  std::vector<std::pair<std::string, Matrix*>> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    out.emplace_back(prefix + "." + std::to_string(i) + ".weight", &layers_[i].weight);
    out.emplace_back(prefix + "." + std::to_string(i) + ".bias", &layers_[i].bias);
  }
  return out;
}

}  // namespace cfs
