#pragma once

#include "cfs/data.hpp"
#include "cfs/feature_set.hpp"
#include "cfs/matrix.hpp"
#include "cfs/selectors.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cfs {

enum class ClassifierKind { Knn, Logistic };

std::string to_string(ClassifierKind kind);
// "knn" or "logistic"; throws ContractError otherwise.
ClassifierKind parse_classifier(const std::string& name);

// Majority vote over the k_neighbors nearest training rows (Euclidean).
// Vote ties go to the smallest label; distance ties to the lower row index.
// Throws ContractError when k_neighbors is 0 or exceeds the training rows.
std::vector<int> knn_classify(const Matrix& train_x, std::span<const int> train_y,
                              const Matrix& test_x, std::size_t k_neighbors = 5);

struct LogisticConfig {
  std::size_t epochs = 200;
  double learning_rate = 1e-2;
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;
};

// Multinomial logistic regression on standardized columns, trained with Adam
// on the mean cross-entropy. Throws ContractError on single-class training data.
std::vector<int> logistic_classify(const Matrix& train_x, std::span<const int> train_y,
                                   const Matrix& test_x, const LogisticConfig& cfg = {});

// Fraction of equal entries. Throws ShapeError on a length mismatch.
double accuracy(std::span<const int> pred, std::span<const int> truth);

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;  // sample standard deviation / sqrt(n)
};

// Throws ContractError for fewer than two values.
MeanStderr mean_stderr(std::span<const double> values);

// Fraction of selected pixels inside the centred window x window block of a
// side x side image.
double central_fraction(const FeatureSet& fs, std::size_t side = 28, std::size_t window = 16);

// side x side image with 1 at selected pixels.
Matrix selection_mask(const FeatureSet& fs, std::size_t side = 28);

struct EvalResult {
  std::string method;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  ClassifierKind classifier = ClassifierKind::Knn;
  double accuracy = 0.0;
  std::optional<double> central_fraction;  // image datasets only
  double seconds = 0.0;
  bool ok = true;
  std::string error;  // set when ok is false
  FeatureSet features;
};

// Every (method, k, seed) cell is trained and scored exactly once.
struct Harness {
  std::vector<Mode> methods;
  std::vector<std::size_t> ks;
  std::vector<std::uint64_t> seeds;
  ClassifierKind classifier = ClassifierKind::Knn;
  std::size_t k_neighbors = 5;
  LogisticConfig logistic;
  TrainConfig train;  // k and seed are overridden per cell
  double train_fraction = 0.8;
  // Square image side; enables the central-window metric and masks when
  // side * side equals the feature count.
  std::optional<std::size_t> image_side;
  std::size_t central_window = 16;
  std::filesystem::path mask_dir;  // empty: no masks written
  std::size_t workers = 1;

  void validate(const Dataset& data) const;
};

// Cells run on up to `workers` threads; results come back in (method, k,
// seed) order regardless. A failing cell is recorded with ok = false.
std::vector<EvalResult> run_benchmark(const Dataset& data, const Harness& harness);

// method,k,seed,classifier,accuracy,central_fraction,seconds
// Failed cells carry an empty accuracy. `seconds` is written as 0 unless
// record_time is set, so reruns compare byte-for-byte.
void write_results_csv(std::ostream& out, const std::vector<EvalResult>& results,
                       bool record_time = false);

}  // namespace cfs
