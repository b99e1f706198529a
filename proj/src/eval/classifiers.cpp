#include "cfs/adam.hpp"
#include "cfs/errors.hpp"
#include "cfs/eval.hpp"
#include "cfs/tape.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace cfs {

std::string to_string(ClassifierKind kind) {
  return kind == ClassifierKind::Knn ? "knn" : "logistic";
}

ClassifierKind parse_classifier(const std::string& name) {
  if (name == "knn") return ClassifierKind::Knn;
  if (name == "logistic") return ClassifierKind::Logistic;
  throw ContractError("unknown classifier '" + name + "' (expected knn or logistic)");
}

namespace {

void check_training_set(const Matrix& train_x, std::span<const int> train_y, const Matrix& test_x) {
  if (static_cast<std::size_t>(train_x.rows()) != train_y.size()) {
    throw ShapeError("classifier: " + std::to_string(train_x.rows()) + " training rows but " +
                     std::to_string(train_y.size()) + " labels");
  }
  if (train_x.rows() == 0) throw ContractError("classifier: empty training set");
  if (train_x.cols() != test_x.cols()) throw ShapeError("classifier: train/test widths differ");
}

}  // namespace

std::vector<int> knn_classify(const Matrix& train_x, std::span<const int> train_y,
                              const Matrix& test_x, std::size_t k_neighbors) {
  check_training_set(train_x, train_y, test_x);
  const auto n = static_cast<std::size_t>(train_x.rows());
  if (k_neighbors == 0 || k_neighbors > n) {
    throw ContractError("knn: k_neighbors=" + std::to_string(k_neighbors) + " but " +
                        std::to_string(n) + " training rows");
  }
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(test_x.rows()));
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (Eigen::Index t = 0; t < test_x.rows(); ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      dist[i] = {(train_x.row(static_cast<Eigen::Index>(i)) - test_x.row(t)).squaredNorm(), i};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_neighbors), dist.end());
    std::map<int, std::size_t> votes;
    for (std::size_t j = 0; j < k_neighbors; ++j) ++votes[train_y[dist[j].second]];
    // std::map iterates labels in increasing order, so '>' keeps the smallest on ties
    int best = votes.begin()->first;
    std::size_t best_votes = 0;
    for (const auto& [label, count] : votes) {
      if (count > best_votes) {
        best = label;
        best_votes = count;
      }
    }
    out.push_back(best);
  }
  return out;
}

std::vector<int> logistic_classify(const Matrix& train_x, std::span<const int> train_y,
                                   const Matrix& test_x, const LogisticConfig& cfg) {
  check_training_set(train_x, train_y, test_x);
  std::vector<int> classes(train_y.begin(), train_y.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  if (classes.size() < 2) throw ContractError("logistic: training data has a single class");
  if (cfg.batch_size == 0) throw ContractError("logistic: batch size must be >= 1");

  const Eigen::Index n = train_x.rows();
  const Eigen::Index d = train_x.cols();
  const auto c = static_cast<Eigen::Index>(classes.size());
  Matrix mean = train_x.colwise().mean();
  Matrix scale(1, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double sd = std::sqrt((train_x.col(j).array() - mean(0, j)).square().mean());
    scale(0, j) = sd > 1e-12 ? 1.0 / sd : 0.0;
  }
  auto standardize = [&](const Matrix& x) {
    Matrix z = x;
    z.rowwise() -= mean.row(0);
    for (Eigen::Index r = 0; r < z.rows(); ++r) z.row(r).array() *= scale.row(0).array();
    return z;
  };
  const Matrix xs = standardize(train_x);
  Matrix onehot = Matrix::Zero(n, c);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto pos = std::lower_bound(classes.begin(), classes.end(), train_y[static_cast<std::size_t>(r)]);
    onehot(r, pos - classes.begin()) = 1.0;
  }

  Matrix weight = Matrix::Zero(d, c);
  Matrix bias = Matrix::Zero(1, c);
  std::vector<Matrix*> params{&weight, &bias};
  AdamState adam(AdamConfig{.learning_rate = cfg.learning_rate}, params);
  Rng rng(cfg.seed);
  const auto rows = static_cast<std::size_t>(n);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto perm = rng.permutation(rows);
    for (std::size_t start = 0; start < rows; start += cfg.batch_size) {
      const auto idx = std::span<const std::size_t>(perm).subspan(start, std::min(cfg.batch_size, rows - start));
      Tape tape;
      const Var w = tape.leaf(weight, true);
      const Var b = tape.leaf(bias, true);
      const Var logits = tape.add_row(tape.matmul(tape.constant(gather_rows(xs, idx)), w), b);
      const Var loss = tape.softmax_cross_entropy(logits, tape.constant(gather_rows(onehot, idx)));
      tape.backward(loss);
      const std::vector<Matrix> grads{tape.grad(w), tape.grad(b)};
      adam.step(params, grads);
    }
  }

  Matrix logits = matmul(standardize(test_x), weight);
  logits.rowwise() += bias.row(0);
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < c; ++j) {
      if (logits(r, j) > logits(r, best)) best = j;
    }
    out.push_back(classes[static_cast<std::size_t>(best)]);
  }
  return out;
}

double accuracy(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size()) {
    throw ShapeError("accuracy: " + std::to_string(pred.size()) + " predictions for " +
                     std::to_string(truth.size()) + " labels");
  }
  if (pred.empty()) throw ContractError("accuracy: no predictions");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

MeanStderr mean_stderr(std::span<const double> values) {
  if (values.size() < 2) throw ContractError("mean_stderr: need at least two values");
  const auto n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

double central_fraction(const FeatureSet& fs, std::size_t side, std::size_t window) {
  if (window > side) throw ContractError("central_fraction: window larger than image");
  fs.validate(side * side);
  if (fs.k() == 0) return 0.0;
  const std::size_t lo = (side - window) / 2;
  const std::size_t hi = lo + window;
  std::size_t inside = 0;
  for (std::size_t idx : fs.indices) {
    const std::size_t r = idx / side, c = idx % side;
    inside += r >= lo && r < hi && c >= lo && c < hi;
  }
  return static_cast<double>(inside) / static_cast<double>(fs.k());
}

Matrix selection_mask(const FeatureSet& fs, std::size_t side) {
  fs.validate(side * side);
  Matrix mask = Matrix::Zero(static_cast<Eigen::Index>(side), static_cast<Eigen::Index>(side));
  for (std::size_t idx : fs.indices) mask.data()[idx] = 1.0;
  return mask;
}

}  // namespace cfs
