#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace cfs {

// Dense row-major 64-bit matrix; the single numeric carrier for data,
// activations and parameters.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Matrix make_matrix(std::initializer_list<std::initializer_list<double>> rows);
Matrix row_vector(std::span<const double> values);

// Checked product; throws ShapeError when a.cols() != b.rows().
Matrix matmul(const Matrix& a, const Matrix& b);

// Mean over all entries of the squared difference.
double mse(const Matrix& pred, const Matrix& target);

bool all_finite(const Matrix& m);

// Copies the given rows (in order) into a new matrix.
Matrix gather_rows(const Matrix& m, std::span<const std::size_t> rows);
// Copies the given columns (in order) into a new matrix.
Matrix gather_cols(const Matrix& m, std::span<const std::size_t> cols);

// Standard normal CDF and density.
double gaussian_cdf(double t);
double gaussian_pdf(double t);

}  // namespace cfs
