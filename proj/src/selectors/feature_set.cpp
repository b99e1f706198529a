#include "cfs/feature_set.hpp"

#include "cfs/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace cfs {

void FeatureSet::validate(std::size_t d) const {
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= d) throw ContractError("feature set: index out of range");
    if (i > 0 && indices[i] <= indices[i - 1]) {
      throw ContractError("feature set: indices must be strictly increasing");
    }
  }
}

FeatureSet FeatureSet::from_indices(std::vector<std::size_t> indices, std::vector<double> mu) {
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  return FeatureSet{std::move(indices), std::move(mu)};
}

std::string feature_set_to_json(const FeatureSet& fs) {
  nlohmann::ordered_json j;
  j["k"] = fs.k();
  j["indices"] = fs.indices;
  j["mu"] = fs.mu;
  return j.dump(2) + "\n";
}

FeatureSet feature_set_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("feature set JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("indices") || !j["indices"].is_array()) {
    throw DataError("feature set JSON: missing \"indices\" array");
  }
  for (const auto& v : j["indices"]) {
    if (!v.is_number_unsigned()) throw DataError("feature set JSON: indices must be nonnegative integers");
  }
  if (j.contains("k") && !j["k"].is_number_unsigned()) {
    throw DataError("feature set JSON: \"k\" must be a nonnegative integer");
  }
  FeatureSet fs;
  try {
    fs.indices = j["indices"].get<std::vector<std::size_t>>();
    if (j.contains("mu")) fs.mu = j["mu"].get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("feature set JSON: ") + e.what());
  }
  if (j.contains("k") && j["k"].get<std::size_t>() != fs.indices.size()) {
    throw DataError("feature set JSON: \"k\" disagrees with the number of indices");
  }
  for (std::size_t i = 1; i < fs.indices.size(); ++i) {
    if (fs.indices[i] <= fs.indices[i - 1]) {
      throw DataError("feature set JSON: indices must be strictly increasing");
    }
  }
  return fs;
}

void write_feature_set(const std::filesystem::path& path, const FeatureSet& fs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << feature_set_to_json(fs);
}

FeatureSet read_feature_set(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return feature_set_from_json(buf.str());
}

}  // namespace cfs
