#include "cfs/data.hpp"

#include "cfs/errors.hpp"
#include "cfs/text.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace cfs {

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::uint32_t read_be32(const std::string& bytes, std::size_t offset) {
  if (bytes.size() < offset + 4) throw DataError("IDX: truncated header");
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) v = (v << 8) | static_cast<unsigned char>(bytes[offset + i]);
  return v;
}

void put_be32(std::string& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<char>((v >> shift) & 0xFF));
}

void write_bytes(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

constexpr std::uint32_t kIdxLabels = 0x00000801;
constexpr std::uint32_t kIdxImages = 0x00000803;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_cells(std::string_view line, std::size_t line_no) {
  if (line.find('"') != std::string_view::npos) {
    throw DataError("CSV: quoted cells are not supported", line_no);
  }
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

}  // namespace

IdxImages load_idx_images(const std::filesystem::path& path) {
  const std::string bytes = slurp(path);
  if (read_be32(bytes, 0) != kIdxImages) throw DataError("IDX: bad image magic in " + path.string());
  IdxImages out;
  out.count = read_be32(bytes, 4);
  out.rows = read_be32(bytes, 8);
  out.cols = read_be32(bytes, 12);
  const std::size_t pixels = out.rows * out.cols;
  if (bytes.size() != 16 + out.count * pixels) throw DataError("IDX: image payload size mismatch");
  out.pixels.resize(static_cast<Eigen::Index>(out.count), static_cast<Eigen::Index>(pixels));
  for (std::size_t i = 0; i < out.count * pixels; ++i) {
    out.pixels.data()[i] = static_cast<unsigned char>(bytes[16 + i]) / 255.0;
  }
  return out;
}

std::vector<int> load_idx_labels(const std::filesystem::path& path) {
  const std::string bytes = slurp(path);
  if (read_be32(bytes, 0) != kIdxLabels) throw DataError("IDX: bad label magic in " + path.string());
  const std::size_t count = read_be32(bytes, 4);
  if (bytes.size() != 8 + count) throw DataError("IDX: label payload size mismatch");
  std::vector<int> labels(count);
  for (std::size_t i = 0; i < count; ++i) labels[i] = static_cast<unsigned char>(bytes[8 + i]);
  return labels;
}

void write_idx_images(const std::filesystem::path& path, const IdxImages& images) {
  std::string out;
  put_be32(out, kIdxImages);
  put_be32(out, static_cast<std::uint32_t>(images.count));
  put_be32(out, static_cast<std::uint32_t>(images.rows));
  put_be32(out, static_cast<std::uint32_t>(images.cols));
  for (Eigen::Index i = 0; i < images.pixels.size(); ++i) {
    const double v = std::clamp(images.pixels.data()[i], 0.0, 1.0);
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
  }
  write_bytes(path, out);
}

void write_idx_labels(const std::filesystem::path& path, const std::vector<int>& labels) {
  std::string out;
  put_be32(out, kIdxLabels);
  put_be32(out, static_cast<std::uint32_t>(labels.size()));
  for (int l : labels) out.push_back(static_cast<char>(static_cast<unsigned char>(l)));
  write_bytes(path, out);
}

ImageSet load_mnist(const std::filesystem::path& images, const std::filesystem::path& labels) {
  IdxImages raw = load_idx_images(images);
  if (raw.rows != raw.cols) throw DataError("IDX: images are not square");
  ImageSet set;
  set.side = raw.rows;
  set.pixels = std::move(raw.pixels);
  set.labels = load_idx_labels(labels);
  if (set.labels.size() != set.size()) throw DataError("IDX: image and label counts differ");
  return set;
}

CsvTable parse_csv(const std::string& text, const std::optional<std::string>& label_column) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw DataError("CSV: missing header row");
  ++line_no;
  const auto header = split_cells(line, line_no);
  std::ptrdiff_t label_idx = -1;
  CsvTable table;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (label_column && header[i] == *label_column) {
      label_idx = static_cast<std::ptrdiff_t>(i);
    } else {
      table.header.emplace_back(header[i]);
    }
  }
  if (label_column && label_idx < 0) throw DataError("CSV: label column '" + *label_column + "' not found");

  std::vector<double> values;
  std::vector<std::string> raw_labels;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_cells(line, line_no);
    if (cells.size() != header.size()) {
      throw DataError("CSV: expected " + std::to_string(header.size()) + " cells, found " +
                      std::to_string(cells.size()),
                      line_no);
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (static_cast<std::ptrdiff_t>(i) == label_idx) {
        raw_labels.emplace_back(cells[i]);
        continue;
      }
      double v = 0.0;
      const auto* first = cells[i].data();
      const auto* last = first + cells[i].size();
      if (!cells[i].empty() && *first == '+') ++first;
      const auto res = std::from_chars(first, last, v);
      if (cells[i].empty() || res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) {
        throw DataError("CSV: non-numeric cell '" + std::string(cells[i]) + "' in column '" +
                            std::string(header[i]) + "'",
                        line_no);
      }
      values.push_back(v);
    }
    ++rows;
  }
  table.data.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(table.header.size()));
  std::copy(values.begin(), values.end(), table.data.data());
  if (label_idx >= 0) {
    std::map<std::string, int> codes;
    for (const auto& l : raw_labels) codes.emplace(l, 0);
    int next = 0;
    for (auto& [name, code] : codes) {
      code = next++;
      table.label_names.push_back(name);
    }
    for (const auto& l : raw_labels) table.labels.push_back(codes.at(l));
  }
  return table;
}

CsvTable load_csv(const std::filesystem::path& path, const std::optional<std::string>& label_column) {
  return parse_csv(slurp(path), label_column);
}

void write_csv(const std::filesystem::path& path, const Matrix& data,
               const std::vector<std::string>& header) {
  if (header.size() != static_cast<std::size_t>(data.cols())) {
    throw DataError("CSV: header width does not match data");
  }
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out += ',';
    out += header[i];
  }
  out += '\n';
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
      if (c) out += ',';
      out += format_double(data(r, c));
    }
    out += '\n';
  }
  write_bytes(path, out);
}

void write_dataset(const std::filesystem::path& dir, const Dataset& data) {
  data.validate();
  std::filesystem::create_directories(dir);
  std::vector<std::string> names = data.feature_names;
  if (names.empty()) {
    for (std::size_t j = 0; j < data.features(); ++j) names.push_back("f" + std::to_string(j));
  }
  write_csv(dir / "target.csv", data.target, names);
  write_csv(dir / "background.csv", data.background, names);
  if (!data.target_labels.empty()) {
    std::string out = "label\n";
    for (int l : data.target_labels) out += std::to_string(l) + "\n";
    write_bytes(dir / "labels.csv", out);
  }
}

Dataset read_dataset(const std::filesystem::path& dir) {
  Dataset data;
  CsvTable target = load_csv(dir / "target.csv");
  CsvTable background = load_csv(dir / "background.csv");
  if (target.header != background.header) throw DataError("dataset: target/background headers differ");
  data.target = std::move(target.data);
  data.background = std::move(background.data);
  data.feature_names = std::move(target.header);
  if (std::filesystem::exists(dir / "labels.csv")) {
    const CsvTable labels = load_csv(dir / "labels.csv");
    if (labels.data.cols() != 1) throw DataError("labels.csv must have one column");
    for (Eigen::Index i = 0; i < labels.data.rows(); ++i) {
      data.target_labels.push_back(static_cast<int>(labels.data(i, 0)));
    }
  }
  data.validate();
  return data;
}

}  // namespace cfs
