#include "cfs/data.hpp"

#include "cfs/errors.hpp"

#include <algorithm>
#include <cmath>

namespace cfs {

Matrix minmax_normalize(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const double lo = m.col(c).minCoeff();
    const double span = m.col(c).maxCoeff() - lo;
    if (span > 0.0) {
      out.col(c) = (m.col(c).array() - lo) / span;
    } else {
      out.col(c).setZero();
    }
  }
  return out;
}

Matrix log1p_libsize_normalize(const Matrix& counts) {
  if ((counts.array() < 0.0).any()) throw DataError("log1p normalization: negative counts");
  if (counts.rows() == 0) return counts;
  std::vector<double> sizes(static_cast<std::size_t>(counts.rows()));
  for (Eigen::Index r = 0; r < counts.rows(); ++r) sizes[static_cast<std::size_t>(r)] = counts.row(r).sum();
  std::vector<double> sorted = sizes;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  Matrix out(counts.rows(), counts.cols());
  for (Eigen::Index r = 0; r < counts.rows(); ++r) {
    const double size = sizes[static_cast<std::size_t>(r)];
    const double factor = size > 0.0 ? median / size : 0.0;
    out.row(r) = (counts.row(r).array() * factor).log1p();
  }
  return out;
}

SplitIndices split_indices(std::size_t n, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ContractError("split: fraction must be in (0, 1)");
  Rng rng(seed);
  const auto perm = rng.permutation(n);
  const auto cut = static_cast<std::size_t>(std::llround(static_cast<double>(n) * fraction));
  SplitIndices out;
  out.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(cut));
  out.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(cut), perm.end());
  return out;
}

DatasetSplit split(const Dataset& data, double fraction, std::uint64_t seed) {
  data.validate();
  DatasetSplit out;
  out.indices = split_indices(static_cast<std::size_t>(data.target.rows()), fraction, seed);
  out.train.target = gather_rows(data.target, out.indices.train);
  out.train.background = data.background;
  out.train.feature_names = data.feature_names;
  out.test_target = gather_rows(data.target, out.indices.test);
  if (!data.target_labels.empty()) {
    for (std::size_t i : out.indices.train) out.train.target_labels.push_back(data.target_labels[i]);
    for (std::size_t i : out.indices.test) out.test_labels.push_back(data.target_labels[i]);
  }
  return out;
}

}  // namespace cfs
