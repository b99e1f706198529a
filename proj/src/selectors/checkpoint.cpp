#include "cfs/checkpoint.hpp"

#include "cfs/errors.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace cfs {

namespace {

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
  }
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T get_le() {
    need(sizeof(T));
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      value |= static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return value;
  }

  std::string get_bytes(std::size_t n) {
    need(n);
    std::string out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw DataError("checkpoint: truncated file");
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_checkpoint(const std::vector<NamedMatrix>& entries) {
  std::string out(kCheckpointMagic, 16);
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(entries.size()));
  for (const auto& e : entries) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(e.name.size()));
    out += e.name;
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(e.value.rows()));
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(e.value.cols()));
    for (Eigen::Index i = 0; i < e.value.size(); ++i) {
      put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(e.value.data()[i]));
    }
  }
  return out;
}

std::vector<NamedMatrix> decode_checkpoint(const std::string& bytes) {
  Reader in(bytes);
  if (in.get_bytes(16) != std::string(kCheckpointMagic, 16)) {
    throw DataError("checkpoint: bad magic header");
  }
  const auto version = in.get_le<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw DataError("checkpoint: unsupported version " + std::to_string(version));
  }
  const auto count = in.get_le<std::uint32_t>();
  std::vector<NamedMatrix> entries;
  for (std::uint32_t k = 0; k < count; ++k) {
    NamedMatrix e;
    e.name = in.get_bytes(in.get_le<std::uint32_t>());
    const auto rows = in.get_le<std::uint64_t>();
    const auto cols = in.get_le<std::uint64_t>();
    if (cols != 0 && rows > (bytes.size() / 8) / cols) throw DataError("checkpoint: corrupt shape");
    e.value.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < e.value.size(); ++i) {
      e.value.data()[i] = std::bit_cast<double>(in.get_le<std::uint64_t>());
    }
    entries.push_back(std::move(e));
  }
  if (!in.done()) throw DataError("checkpoint: trailing bytes");
  return entries;
}

void write_checkpoint(const std::filesystem::path& path, const std::vector<NamedMatrix>& entries) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  const std::string bytes = encode_checkpoint(entries);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::vector<NamedMatrix> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return decode_checkpoint(buf.str());
}

const Matrix& checkpoint_entry(const std::vector<NamedMatrix>& entries, const std::string& name) {
  for (const auto& e : entries) {
    if (e.name == name) return e.value;
  }
  throw DataError("checkpoint: missing entry '" + name + "'");
}

}  // namespace cfs
