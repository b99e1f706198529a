#pragma once

#include "cfs/matrix.hpp"
#include "cfs/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cfs {

// A target/background pair over the same d features. Labels describe target
// rows and are only ever read by evaluation code.
struct Dataset {
  Matrix target;
  Matrix background;
  std::vector<int> target_labels;
  std::vector<std::string> feature_names;

  std::size_t features() const { return static_cast<std::size_t>(target.cols()); }
  // Throws DataError when target and background widths differ or labels do
  // not match the target rows.
  void validate() const;
};

// ---- images ---------------------------------------------------------------

// Row-major stack of square grayscale images, one image per row, values in [0, 1].
struct ImageSet {
  Matrix pixels;
  std::vector<int> labels;
  std::size_t side = 0;

  std::size_t size() const { return static_cast<std::size_t>(pixels.rows()); }
};

// Stroke-rendered handwritten-style digits, centred in a side x side frame
// with random affine jitter and stroke width. Labels cycle 0..9 in a
// shuffled order.
ImageSet render_digits(std::size_t count, std::size_t side, Rng& rng);

// Bilinearly smoothed multi-octave value noise with elongated vertical cells,
// values in [0, 1].
Matrix procedural_texture(std::size_t side, Rng& rng);

// Uniformly random square crop (side in [out_side, min(h, w)]) of a
// grayscale image, bilinearly resized to out_side x out_side.
Matrix random_crop_resize(const Matrix& image, std::size_t out_side, Rng& rng);

// (max - min) of a row or image.
double amplitude(const Matrix& image);

// Texture rescaled so that min -> 0 and (max - min) == amplitude_target.
Matrix scale_texture(const Matrix& texture, double amplitude_target);

enum class TextureSource { Procedural, Directory };

struct GrassyConfig {
  std::size_t side = 28;
  TextureSource source = TextureSource::Procedural;
  std::filesystem::path texture_dir;  // PGM files, used when source == Directory
  double scale = 2.0;                 // texture amplitude / digit amplitude
  std::size_t n_target = 2000;
  std::size_t n_background = 2000;
  std::uint64_t seed = 0;

  void validate() const;
};

// Target rows: digit + texture scaled to `scale` times the digit's amplitude.
// Background rows: independently drawn textures scaled the same way against a
// randomly drawn digit's amplitude, with no digit added. Pixels clipped to
// [0, 1 + scale].
Dataset gen_grassy(const ImageSet& digits, const GrassyConfig& cfg, Rng& rng);

// ---- planted factors ------------------------------------------------------

struct PlantedDataset {
  Dataset data;
  std::vector<std::size_t> salient;  // sorted ground-truth salient columns
};

// z ~ N(0, I_l) mixed into every feature by a random linear map; target rows
// add snr * s (s ~ N(0, I_k)) on the salient columns, background rows keep
// s = 0. Labels encode the sign pattern of the first min(k, 3) salient
// factors.
PlantedDataset gen_planted(std::size_t n, std::size_t m, std::size_t d, std::size_t k_salient,
                           std::size_t l_background, double snr, std::uint64_t seed);

// ---- file formats ---------------------------------------------------------

struct IdxImages {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  Matrix pixels;  // count x (rows * cols), bytes scaled to [0, 1]
};

// Big-endian IDX (0x00000803 images, 0x00000801 labels).
IdxImages load_idx_images(const std::filesystem::path& path);
std::vector<int> load_idx_labels(const std::filesystem::path& path);
void write_idx_images(const std::filesystem::path& path, const IdxImages& images);
void write_idx_labels(const std::filesystem::path& path, const std::vector<int>& labels);
ImageSet load_mnist(const std::filesystem::path& images, const std::filesystem::path& labels);

struct CsvTable {
  Matrix data;
  std::vector<std::string> header;       // names of the numeric columns
  std::vector<int> labels;               // codes into label_names
  std::vector<std::string> label_names;  // sorted distinct label values
};

// Comma-delimited UTF-8 with a header row. Quoted cells are rejected. Cells
// outside `label_column` must parse as finite numbers.
CsvTable load_csv(const std::filesystem::path& path,
                  const std::optional<std::string>& label_column = std::nullopt);
CsvTable parse_csv(const std::string& text,
                   const std::optional<std::string>& label_column = std::nullopt);
void write_csv(const std::filesystem::path& path, const Matrix& data,
               const std::vector<std::string>& header);

// target.csv, background.csv and labels.csv in `dir`.
void write_dataset(const std::filesystem::path& dir, const Dataset& data);
Dataset read_dataset(const std::filesystem::path& dir);

// Binary (P5) and ASCII (P2) greymaps, values scaled to [0, 1].
Matrix load_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const Matrix& image);

// ---- transforms -----------------------------------------------------------

// Per-column (x - min) / (max - min); constant columns map to 0.
Matrix minmax_normalize(const Matrix& m);
// Scales each row to the median library size then applies log(1 + x).
// Throws DataError on negative counts.
Matrix log1p_libsize_normalize(const Matrix& counts);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Seeded permutation; round(n * fraction) rows go to train.
SplitIndices split_indices(std::size_t n, double fraction, std::uint64_t seed);

struct DatasetSplit {
  Dataset train;  // background kept whole
  Matrix test_target;
  std::vector<int> test_labels;
  SplitIndices indices;
};

DatasetSplit split(const Dataset& data, double fraction, std::uint64_t seed);

}  // namespace cfs
