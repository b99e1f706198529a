#pragma once

#include "cfs/matrix.hpp"
#include "cfs/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace cfs::testing {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
  return m;
}

// Central differences with step h over every entry of every input.
inline std::vector<Matrix> numeric_gradient(
    const std::function<double(const std::vector<Matrix>&)>& f, std::vector<Matrix> inputs,
    double h = 1e-5) {
  std::vector<Matrix> out;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    Matrix g(inputs[k].rows(), inputs[k].cols());
    for (Eigen::Index i = 0; i < inputs[k].size(); ++i) {
      const double keep = inputs[k].data()[i];
      inputs[k].data()[i] = keep + h;
      const double up = f(inputs);
      inputs[k].data()[i] = keep - h;
      const double down = f(inputs);
      inputs[k].data()[i] = keep;
      g.data()[i] = (up - down) / (2.0 * h);
    }
    out.push_back(std::move(g));
  }
  return out;
}

// ||a - n|| / max(||a||, ||n||), 0 when both vanish.
inline double relative_error(const Matrix& analytic, const Matrix& numeric) {
  const double denom = std::max(analytic.norm(), numeric.norm());
  if (denom < 1e-14) return (analytic - numeric).norm();
  return (analytic - numeric).norm() / denom;
}

}  // namespace cfs::testing
