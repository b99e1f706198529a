#include "cfs/tape.hpp"

#include "cfs/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cfs {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
  }
}

void require_row(const Matrix& a, const Matrix& row, const char* op) {
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw ShapeError(std::string(op) + ": expected a 1x" + std::to_string(a.cols()) + " row");
  }
}

double softplus_neg_abs(double z) { return std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Matrix softmax_rows(const Matrix& a) {
  Matrix out(a.rows(), a.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    const double peak = a.row(r).maxCoeff();
    double total = 0.0;
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      out(r, c) = std::exp(a(r, c) - peak);
      total += out(r, c);
    }
    out.row(r) /= total;
  }
  return out;
}

Matrix scalar(double v) {
  Matrix out(1, 1);
  out(0, 0) = v;
  return out;
}

}  // namespace

Var Tape::leaf(Matrix value, bool requires_grad) {
  Node n;
  n.op = Op::Leaf;
  n.needs_grad = requires_grad;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

const Tape::Node& Tape::node(Var v) const {
  if (v.id >= nodes_.size()) throw ContractError("Tape: variable does not belong to this tape");
  return nodes_[v.id];
}

const Matrix& Tape::value(Var v) const { return node(v).value; }
bool Tape::requires_grad(Var v) const { return node(v).needs_grad; }
Tape::Op Tape::op(Var v) const { return node(v).op; }

Matrix Tape::evaluate(const Node& n, const Matrix& a, const Matrix& b) {
  switch (n.op) {
    case Op::Leaf:
      return n.value;
    case Op::MatMul:
      return cfs::matmul(a, b);
    case Op::Transpose:
      return a.transpose();
    case Op::Add:
      require_same_shape(a, b, "add");
      return a + b;
    case Op::AddRow: {
      require_row(a, b, "add_row");
      Matrix out = a;
      out.rowwise() += b.row(0);
      return out;
    }
    case Op::Mul:
      require_same_shape(a, b, "mul");
      return a.cwiseProduct(b);
    case Op::MulRow: {
      require_row(a, b, "mul_row");
      Matrix out = a;
      for (Eigen::Index r = 0; r < out.rows(); ++r) out.row(r).array() *= b.row(0).array();
      return out;
    }
    case Op::Scale:
      return a * n.attr;
    case Op::Relu:
      return a.cwiseMax(0.0);
    case Op::Clamp01:
      return a.cwiseMax(0.0).cwiseMin(1.0);
    case Op::MeanSquare:
      return scalar(mse(a, b));
    case Op::ConcatCols: {
      if (a.rows() != b.rows()) throw ShapeError("concat_cols: row counts differ");
      Matrix out(a.rows(), a.cols() + b.cols());
      out.leftCols(a.cols()) = a;
      out.rightCols(b.cols()) = b;
      return out;
    }
    case Op::StopGradient:
      return a;
    case Op::GaussCdfSum: {
      double total = 0.0;
      for (Eigen::Index i = 0; i < a.size(); ++i) total += gaussian_cdf(a.data()[i] * n.attr);
      return scalar(total);
    }
    case Op::RowSoftmax:
      return softmax_rows(a);
    case Op::BceWithLogits: {
      require_same_shape(a, b, "bce_with_logits");
      double total = 0.0;
      for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double z = a.data()[i];
        total += std::max(z, 0.0) - z * b.data()[i] + softplus_neg_abs(z);
      }
      return scalar(total / static_cast<double>(a.size()));
    }
    case Op::SoftmaxCrossEntropy: {
      require_same_shape(a, b, "softmax_cross_entropy");
      double total = 0.0;
      for (Eigen::Index r = 0; r < a.rows(); ++r) {
        const double peak = a.row(r).maxCoeff();
        const double log_norm = peak + std::log((a.row(r).array() - peak).exp().sum());
        for (Eigen::Index c = 0; c < a.cols(); ++c) total -= b(r, c) * (a(r, c) - log_norm);
      }
      return scalar(total / static_cast<double>(a.rows()));
    }
  }
  throw ContractError("Tape: unknown op");
}

Var Tape::record(Op op, std::size_t lhs, std::size_t rhs, double attr, bool binary) {
  if (lhs >= nodes_.size() || rhs >= nodes_.size()) {
    throw ContractError("Tape: variable does not belong to this tape");
  }
  Node n;
  n.op = op;
  n.lhs = lhs;
  n.rhs = rhs;
  n.attr = attr;
  n.value = evaluate(n, nodes_[lhs].value, nodes_[rhs].value);
  if (op != Op::StopGradient) {
    n.needs_grad = nodes_[lhs].needs_grad || (binary && nodes_[rhs].needs_grad);
  }
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Tape::matmul(Var a, Var b) { return record(Op::MatMul, a.id, b.id, 0.0, true); }
Var Tape::transpose(Var a) { return record(Op::Transpose, a.id, a.id, 0.0, false); }
Var Tape::add(Var a, Var b) { return record(Op::Add, a.id, b.id, 0.0, true); }
Var Tape::add_row(Var a, Var row) { return record(Op::AddRow, a.id, row.id, 0.0, true); }
Var Tape::mul(Var a, Var b) { return record(Op::Mul, a.id, b.id, 0.0, true); }
Var Tape::mul_row(Var a, Var row) { return record(Op::MulRow, a.id, row.id, 0.0, true); }
Var Tape::scale(Var a, double factor) { return record(Op::Scale, a.id, a.id, factor, false); }
Var Tape::relu(Var a) { return record(Op::Relu, a.id, a.id, 0.0, false); }
Var Tape::clamp01(Var a) { return record(Op::Clamp01, a.id, a.id, 0.0, false); }
Var Tape::mean_square(Var pred, Var target) {
  return record(Op::MeanSquare, pred.id, target.id, 0.0, true);
}
Var Tape::concat_cols(Var left, Var right) {
  return record(Op::ConcatCols, left.id, right.id, 0.0, true);
}
Var Tape::stop_gradient(Var a) { return record(Op::StopGradient, a.id, a.id, 0.0, false); }
Var Tape::gauss_cdf_sum(Var a, double inv_scale) {
  return record(Op::GaussCdfSum, a.id, a.id, inv_scale, false);
}
Var Tape::row_softmax(Var a) { return record(Op::RowSoftmax, a.id, a.id, 0.0, false); }
// Labels are data; no adjoint flows into them.
Var Tape::bce_with_logits(Var logits, Var labels) {
  return record(Op::BceWithLogits, logits.id, labels.id, 0.0, false);
}
Var Tape::softmax_cross_entropy(Var logits, Var one_hot) {
  return record(Op::SoftmaxCrossEntropy, logits.id, one_hot.id, 0.0, false);
}

void Tape::backward(Var loss) {
  const Node& root = node(loss);
  if (root.value.rows() != 1 || root.value.cols() != 1) {
    throw ContractError("backward: loss must be 1x1, got " + std::to_string(root.value.rows()) +
                        "x" + std::to_string(root.value.cols()));
  }
  grads_.assign(nodes_.size(), Matrix());
  grads_[loss.id] = Matrix::Ones(1, 1);

  auto accumulate = [&](std::size_t id, const Matrix& g) {
    if (!nodes_[id].needs_grad) return;
    if (grads_[id].size() == 0) {
      grads_[id] = g;
    } else {
      grads_[id] += g;
    }
  };

  for (std::size_t i = loss.id + 1; i-- > 0;) {
    const Node& n = nodes_[i];
    if (!n.needs_grad || grads_[i].size() == 0 || n.op == Op::Leaf) continue;
    const Matrix& g = grads_[i];
    const Matrix& a = nodes_[n.lhs].value;
    const Matrix& b = nodes_[n.rhs].value;
    switch (n.op) {
      case Op::Leaf:
      case Op::StopGradient:
        break;
      case Op::MatMul:
        if (nodes_[n.lhs].needs_grad) accumulate(n.lhs, g * b.transpose());
        if (nodes_[n.rhs].needs_grad) accumulate(n.rhs, a.transpose() * g);
        break;
      case Op::Transpose:
        accumulate(n.lhs, g.transpose());
        break;
      case Op::Add:
        accumulate(n.lhs, g);
        accumulate(n.rhs, g);
        break;
      case Op::AddRow:
        accumulate(n.lhs, g);
        if (nodes_[n.rhs].needs_grad) accumulate(n.rhs, g.colwise().sum());
        break;
      case Op::Mul:
        if (nodes_[n.lhs].needs_grad) accumulate(n.lhs, g.cwiseProduct(b));
        if (nodes_[n.rhs].needs_grad) accumulate(n.rhs, g.cwiseProduct(a));
        break;
      case Op::MulRow:
        if (nodes_[n.lhs].needs_grad) {
          Matrix ga = g;
          for (Eigen::Index r = 0; r < ga.rows(); ++r) ga.row(r).array() *= b.row(0).array();
          accumulate(n.lhs, ga);
        }
        if (nodes_[n.rhs].needs_grad) accumulate(n.rhs, g.cwiseProduct(a).colwise().sum());
        break;
      case Op::Scale:
        accumulate(n.lhs, g * n.attr);
        break;
      case Op::Relu:
        accumulate(n.lhs, g.cwiseProduct((a.array() > 0.0).cast<double>().matrix()));
        break;
      case Op::Clamp01:
        accumulate(n.lhs,
                   g.cwiseProduct(((a.array() > 0.0) && (a.array() < 1.0)).cast<double>().matrix()));
        break;
      case Op::MeanSquare: {
        const Matrix diff = (a - b) * (2.0 * g(0, 0) / static_cast<double>(a.size()));
        accumulate(n.lhs, diff);
        if (nodes_[n.rhs].needs_grad) accumulate(n.rhs, -diff);
        break;
      }
      case Op::ConcatCols:
        if (nodes_[n.lhs].needs_grad) accumulate(n.lhs, g.leftCols(a.cols()));
        if (nodes_[n.rhs].needs_grad) accumulate(n.rhs, g.rightCols(b.cols()));
        break;
      case Op::GaussCdfSum: {
        Matrix ga(a.rows(), a.cols());
        for (Eigen::Index k = 0; k < a.size(); ++k) {
          ga.data()[k] = g(0, 0) * gaussian_pdf(a.data()[k] * n.attr) * n.attr;
        }
        accumulate(n.lhs, ga);
        break;
      }
      case Op::RowSoftmax: {
        const Matrix& y = n.value;
        Matrix ga = y.cwiseProduct(g);
        for (Eigen::Index r = 0; r < ga.rows(); ++r) {
          const double inner = ga.row(r).sum();
          ga.row(r) -= y.row(r) * inner;
        }
        accumulate(n.lhs, ga);
        break;
      }
      case Op::BceWithLogits: {
        Matrix ga(a.rows(), a.cols());
        const double w = g(0, 0) / static_cast<double>(a.size());
        for (Eigen::Index k = 0; k < a.size(); ++k) {
          ga.data()[k] = w * (sigmoid(a.data()[k]) - b.data()[k]);
        }
        accumulate(n.lhs, ga);
        break;
      }
      case Op::SoftmaxCrossEntropy: {
        Matrix ga = softmax_rows(a) - b;
        ga *= g(0, 0) / static_cast<double>(a.rows());
        accumulate(n.lhs, ga);
        break;
      }
    }
  }
}

Matrix Tape::grad(Var v) const {
  const Node& n = node(v);
  if (v.id < grads_.size() && grads_[v.id].size() != 0) return grads_[v.id];
  return Matrix::Zero(n.value.rows(), n.value.cols());
}

std::vector<Matrix> Tape::replay() const {
  std::vector<Matrix> values;
  values.reserve(nodes_.size());
  for (const Node& n : nodes_) {
    if (n.op == Op::Leaf) {
      values.push_back(n.value);
    } else {
      values.push_back(evaluate(n, values[n.lhs], values[n.rhs]));
    }
  }
  return values;
}

}  // namespace cfs
