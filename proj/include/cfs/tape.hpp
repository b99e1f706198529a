#pragma once

#include "cfs/matrix.hpp"

#include <cstddef>
#include <vector>

namespace cfs {

// Handle to a value recorded on a Tape.
struct Var {
  std::size_t id = 0;
};

// Reverse-mode differentiation over whole matrices. Nodes are appended in
// evaluation order, so the record is already topologically sorted and
// backward() is a single reverse sweep.
class Tape {
 public:
  enum class Op {
    Leaf,
    MatMul,
    Transpose,
    Add,
    AddRow,       // a + broadcast of a 1 x n row
    Mul,          // elementwise
    MulRow,       // a * broadcast of a 1 x n row
    Scale,
    Relu,
    Clamp01,      // min(1, max(0, a)); zero subgradient at 0 and 1
    MeanSquare,   // mean over entries of (a - b)^2, 1 x 1
    ConcatCols,
    StopGradient,
    GaussCdfSum,  // sum_i Phi(a_i * attr), 1 x 1
    RowSoftmax,
    BceWithLogits,       // mean binary cross-entropy, b holds 0/1 labels
    SoftmaxCrossEntropy  // mean categorical cross-entropy, b holds one-hot rows
  };

  Var leaf(Matrix value, bool requires_grad = false);
  Var constant(Matrix value) { return leaf(std::move(value), false); }

  Var matmul(Var a, Var b);
  Var transpose(Var a);
  Var add(Var a, Var b);
  Var add_row(Var a, Var row);
  Var mul(Var a, Var b);
  Var mul_row(Var a, Var row);
  Var scale(Var a, double factor);
  Var relu(Var a);
  Var clamp01(Var a);
  Var mean_square(Var pred, Var target);
  Var concat_cols(Var left, Var right);
  Var stop_gradient(Var a);
  Var gauss_cdf_sum(Var a, double inv_scale);
  Var row_softmax(Var a);
  Var bce_with_logits(Var logits, Var labels);
  Var softmax_cross_entropy(Var logits, Var one_hot);

  const Matrix& value(Var v) const;
  bool requires_grad(Var v) const;

  // Accumulates d(loss)/d(node) for every node that depends on a leaf
  // created with requires_grad. Throws ContractError if loss is not 1 x 1.
  void backward(Var loss);
  // Adjoint of v from the last backward(); zeros when v received none.
  Matrix grad(Var v) const;

  // Recomputes every non-leaf node from the stored leaves, in order.
  std::vector<Matrix> replay() const;

  std::size_t size() const { return nodes_.size(); }
  Op op(Var v) const;

 private:
  struct Node {
    Op op = Op::Leaf;
    std::size_t lhs = 0;
    std::size_t rhs = 0;
    double attr = 0.0;
    bool needs_grad = false;
    Matrix value;
  };

  Var record(Op op, std::size_t lhs, std::size_t rhs, double attr, bool binary);
  static Matrix evaluate(const Node& node, const Matrix& lhs, const Matrix& rhs);
  const Node& node(Var v) const;

  std::vector<Node> nodes_;
  std::vector<Matrix> grads_;
};

}  // namespace cfs
