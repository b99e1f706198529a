#include "cfs/data.hpp"

#include "cfs/errors.hpp"

#include <algorithm>
#include <cmath>

namespace cfs {

void Dataset::validate() const {
  if (target.cols() != background.cols()) {
    throw DataError("dataset: target has " + std::to_string(target.cols()) +
                    " features, background has " + std::to_string(background.cols()));
  }
  if (!target_labels.empty() && target_labels.size() != static_cast<std::size_t>(target.rows())) {
    throw DataError("dataset: label count does not match target rows");
  }
  if (!feature_names.empty() && feature_names.size() != static_cast<std::size_t>(target.cols())) {
    throw DataError("dataset: feature name count does not match feature count");
  }
}

void GrassyConfig::validate() const {
  if (side < 8) throw ContractError("grassy: side must be >= 8");
  if (!(scale >= 0.0) || !std::isfinite(scale)) throw ContractError("grassy: scale must be >= 0");
}

namespace {

std::vector<Matrix> load_texture_pool(const std::filesystem::path& dir, std::size_t side) {
  if (!std::filesystem::is_directory(dir)) throw DataError("texture directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Matrix> pool;
  for (const auto& f : files) {
    Matrix img = load_pgm(f);
    if (std::min(img.rows(), img.cols()) >= static_cast<Eigen::Index>(side)) pool.push_back(std::move(img));
  }
  if (pool.empty()) throw DataError("empty texture pool in " + dir.string());
  return pool;
}

std::vector<std::string> pixel_names(std::size_t side) {
  std::vector<std::string> names;
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) names.push_back("px_" + std::to_string(r) + "_" + std::to_string(c));
  }
  return names;
}

}  // namespace

Dataset gen_grassy(const ImageSet& digits, const GrassyConfig& cfg, Rng& rng) {
  cfg.validate();
  if (digits.size() == 0) throw DataError("grassy: no digit images");
  if (digits.side != cfg.side ||
      static_cast<std::size_t>(digits.pixels.cols()) != cfg.side * cfg.side) {
    throw DataError("grassy: digit images are not " + std::to_string(cfg.side) + "x" +
                    std::to_string(cfg.side));
  }
  std::vector<Matrix> pool;
  if (cfg.source == TextureSource::Directory) pool = load_texture_pool(cfg.texture_dir, cfg.side);
  auto next_texture = [&]() {
    if (cfg.source == TextureSource::Procedural) return procedural_texture(cfg.side, rng);
    return random_crop_resize(pool[rng.below(pool.size())], cfg.side, rng);
  };

  const auto d = static_cast<Eigen::Index>(cfg.side * cfg.side);
  const double ceiling = 1.0 + cfg.scale;
  Dataset out;
  out.target.resize(static_cast<Eigen::Index>(cfg.n_target), d);
  out.background.resize(static_cast<Eigen::Index>(cfg.n_background), d);
  for (std::size_t i = 0; i < cfg.n_target; ++i) {
    const std::size_t which = i % digits.size();
    const Matrix digit = digits.pixels.row(static_cast<Eigen::Index>(which));
    const Matrix texture = scale_texture(next_texture(), cfg.scale * amplitude(digit));
    out.target.row(static_cast<Eigen::Index>(i)) = (digit + texture).cwiseMax(0.0).cwiseMin(ceiling);
    out.target_labels.push_back(digits.labels.empty() ? 0 : digits.labels[which]);
  }
  for (std::size_t i = 0; i < cfg.n_background; ++i) {
    const Matrix reference = digits.pixels.row(static_cast<Eigen::Index>(rng.below(digits.size())));
    const Matrix texture = scale_texture(next_texture(), cfg.scale * amplitude(reference));
    out.background.row(static_cast<Eigen::Index>(i)) = texture.cwiseMax(0.0).cwiseMin(ceiling);
  }
  out.feature_names = pixel_names(cfg.side);
  return out;
}

PlantedDataset gen_planted(std::size_t n, std::size_t m, std::size_t d, std::size_t k_salient,
                           std::size_t l_background, double snr, std::uint64_t seed) {
  if (k_salient + l_background > d) {
    throw ContractError("gen_planted: k_salient + l_background must be <= d");
  }
  if (l_background == 0) throw ContractError("gen_planted: l_background must be >= 1");
  if (!(snr >= 0.0)) throw ContractError("gen_planted: snr must be >= 0");
  Rng rng(seed);
  Matrix mixing(static_cast<Eigen::Index>(l_background), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < mixing.size(); ++i) mixing.data()[i] = rng.normal();

  PlantedDataset out;
  auto perm = rng.permutation(d);
  out.salient.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(k_salient));
  std::sort(out.salient.begin(), out.salient.end());

  auto latent = [&](std::size_t rows) {
    Matrix z(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(l_background));
    for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = rng.normal();
    return z;
  };
  out.data.target = matmul(latent(n), mixing);
  out.data.background = matmul(latent(m), mixing);

  const std::size_t label_bits = std::min<std::size_t>(k_salient, 3);
  for (std::size_t r = 0; r < n; ++r) {
    int label = 0;
    for (std::size_t j = 0; j < k_salient; ++j) {
      const double s = rng.normal();
      out.data.target(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(out.salient[j])) += snr * s;
      if (j < label_bits && s > 0.0) label |= 1 << j;
    }
    out.data.target_labels.push_back(label);
  }
  for (std::size_t j = 0; j < d; ++j) out.data.feature_names.push_back("f" + std::to_string(j));
  return out;
}

}  // namespace cfs
