#include "cfs/data.hpp"

#include "cfs/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cfs {

namespace {

double bilinear(const Matrix& grid, double y, double x) {
  const auto rows = grid.rows();
  const auto cols = grid.cols();
  const auto y0 = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor(y)), 0, rows - 1);
  const auto x0 = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor(x)), 0, cols - 1);
  const auto y1 = std::min<Eigen::Index>(y0 + 1, rows - 1);
  const auto x1 = std::min<Eigen::Index>(x0 + 1, cols - 1);
  const double fy = std::clamp(y - static_cast<double>(y0), 0.0, 1.0);
  const double fx = std::clamp(x - static_cast<double>(x0), 0.0, 1.0);
  const double top = grid(y0, x0) * (1.0 - fx) + grid(y0, x1) * fx;
  const double bottom = grid(y1, x0) * (1.0 - fx) + grid(y1, x1) * fx;
  return top * (1.0 - fy) + bottom * fy;
}

}  // namespace

Matrix procedural_texture(std::size_t side, Rng& rng) {
  if (side < 8) throw ContractError("procedural_texture: side must be >= 8");
  struct Octave {
    double cell_w;
    double cell_h;
    double weight;
  };
  // Narrow cells, down to single pixels, give fine blade-like streaks.
  constexpr Octave octaves[] = {{1.0, 3.0, 1.0}, {1.0, 2.0, 0.6}, {2.0, 2.0, 0.35}, {1.0, 1.0, 0.25}};
  const double s = static_cast<double>(side);
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(side), static_cast<Eigen::Index>(side));
  for (const Octave& o : octaves) {
    const auto gh = static_cast<Eigen::Index>(std::ceil(s / o.cell_h)) + 2;
    const auto gw = static_cast<Eigen::Index>(std::ceil(s / o.cell_w)) + 2;
    Matrix grid(gh, gw);
    for (Eigen::Index i = 0; i < grid.size(); ++i) grid.data()[i] = rng.uniform();
    const double oy = rng.uniform();
    const double ox = rng.uniform();
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
      for (Eigen::Index c = 0; c < out.cols(); ++c) {
        out(r, c) += o.weight * bilinear(grid, static_cast<double>(r) / o.cell_h + oy,
                                         static_cast<double>(c) / o.cell_w + ox);
      }
    }
  }
  const double lo = out.minCoeff();
  const double span = out.maxCoeff() - lo;
  out = (out.array() - lo) / (span > 0.0 ? span : 1.0);
  return out.reshaped<Eigen::RowMajor>(1, out.size());
}

Matrix random_crop_resize(const Matrix& image, std::size_t out_side, Rng& rng) {
  const auto h = static_cast<std::size_t>(image.rows());
  const auto w = static_cast<std::size_t>(image.cols());
  const std::size_t limit = std::min(h, w);
  if (limit < out_side) throw DataError("texture image smaller than the output side");
  const std::size_t crop = out_side + rng.below(limit - out_side + 1);
  const std::size_t top = rng.below(h - crop + 1);
  const std::size_t left = rng.below(w - crop + 1);
  Matrix out(1, static_cast<Eigen::Index>(out_side * out_side));
  const Matrix window = image.block(static_cast<Eigen::Index>(top), static_cast<Eigen::Index>(left),
                                    static_cast<Eigen::Index>(crop), static_cast<Eigen::Index>(crop));
  const double ratio = static_cast<double>(crop) / static_cast<double>(out_side);
  for (std::size_t r = 0; r < out_side; ++r) {
    for (std::size_t c = 0; c < out_side; ++c) {
      const double y = (static_cast<double>(r) + 0.5) * ratio - 0.5;
      const double x = (static_cast<double>(c) + 0.5) * ratio - 0.5;
      out(0, static_cast<Eigen::Index>(r * out_side + c)) = bilinear(window, std::max(y, 0.0), std::max(x, 0.0));
    }
  }
  return out;
}

double amplitude(const Matrix& image) {
  if (image.size() == 0) return 0.0;
  return image.maxCoeff() - image.minCoeff();
}

Matrix scale_texture(const Matrix& texture, double amplitude_target) {
  const double lo = texture.minCoeff();
  const double span = texture.maxCoeff() - lo;
  if (!(span > 0.0)) return Matrix::Zero(texture.rows(), texture.cols());
  return ((texture.array() - lo) * (amplitude_target / span)).matrix();
}

Matrix load_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  auto token = [&]() {
    std::string t;
    while (in >> t) {
      if (t[0] == '#') {
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      return t;
    }
    throw DataError("PGM: truncated header in " + path.string());
  };
  const std::string magic = token();
  if (magic != "P5" && magic != "P2") throw DataError("PGM: unsupported magic in " + path.string());
  const auto w = static_cast<Eigen::Index>(std::stoul(token()));
  const auto h = static_cast<Eigen::Index>(std::stoul(token()));
  const double maxval = std::stod(token());
  if (!(maxval > 0.0) || maxval > 65535.0) throw DataError("PGM: bad maxval");
  Matrix img(h, w);
  if (magic == "P2") {
    for (Eigen::Index i = 0; i < img.size(); ++i) img.data()[i] = std::stod(token()) / maxval;
    return img;
  }
  in.get();  // single whitespace after maxval
  const bool wide = maxval > 255.0;
  for (Eigen::Index i = 0; i < img.size(); ++i) {
    int v = in.get();
    if (wide) v = (v << 8) | in.get();
    if (!in) throw DataError("PGM: truncated pixel data in " + path.string());
    img.data()[i] = v / maxval;
  }
  return img;
}

void write_pgm(const std::filesystem::path& path, const Matrix& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "P5\n" << image.cols() << " " << image.rows() << "\n255\n";
  for (Eigen::Index i = 0; i < image.size(); ++i) {
    const double v = std::clamp(image.data()[i], 0.0, 1.0);
    out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
  }
}

}  // namespace cfs
