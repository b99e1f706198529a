#pragma once

#include "cfs/matrix.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace cfs {

// Flat little-endian container of named float64 matrices:
//
//   offset  size  field
//   0       16    magic "CFS_CHECKPOINT\r\n"
//   16      4     u32 format version (1)
//   20      4     u32 entry count
//   then per entry:
//           4     u32 name length n
//           n     name bytes (UTF-8)
//           8     u64 rows
//           8     u64 cols
//           8*r*c f64 values, row-major
struct NamedMatrix {
  std::string name;
  Matrix value;
};

inline constexpr char kCheckpointMagic[17] = "CFS_CHECKPOINT\r\n";
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(const std::filesystem::path& path, const std::vector<NamedMatrix>& entries);
std::vector<NamedMatrix> read_checkpoint(const std::filesystem::path& path);

std::string encode_checkpoint(const std::vector<NamedMatrix>& entries);
std::vector<NamedMatrix> decode_checkpoint(const std::string& bytes);

// Lookup by name; throws DataError when absent.
const Matrix& checkpoint_entry(const std::vector<NamedMatrix>& entries, const std::string& name);

}  // namespace cfs
