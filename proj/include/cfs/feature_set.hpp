#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace cfs {

// Selected feature indices, strictly increasing. `mu` carries the full gate
// mean vector for gate-based selectors and stays empty otherwise.
struct FeatureSet {
  std::vector<std::size_t> indices;
  std::vector<double> mu;

  std::size_t k() const { return indices.size(); }
  // Throws ContractError on duplicates, disorder, or an index >= d.
  void validate(std::size_t d) const;

  // Sorts and deduplicates `indices`.
  static FeatureSet from_indices(std::vector<std::size_t> indices, std::vector<double> mu = {});
};

// {"k": int, "indices": [int...], "mu": [float...]}
std::string feature_set_to_json(const FeatureSet& fs);
FeatureSet feature_set_from_json(const std::string& text);
void write_feature_set(const std::filesystem::path& path, const FeatureSet& fs);
FeatureSet read_feature_set(const std::filesystem::path& path);

}  // namespace cfs
