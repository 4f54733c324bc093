#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "charembed/tensor.hpp"

namespace charembed {

// Binary checkpoint, all integers little-endian:
//   "T2V1"  u32 version
//   u32 n_symbols, then per symbol: u32 byte length + UTF-8 bytes
//   u32 n_config, then per entry: u32 len + key, u32 len + value
//   u32 n_tensors, then per tensor: u32 len + name, u8 dtype (1=f32, 2=f64),
//       u32 rank, u64 dims[rank], values
struct Checkpoint {
  static constexpr char kMagic[4] = {'T', '2', 'V', '1'};
  static constexpr std::uint32_t kVersion = 1;
  enum class DType : std::uint8_t { kFloat32 = 1, kFloat64 = 2 };

  std::vector<std::string> alphabet;
  std::map<std::string, std::string> config;
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor* find(const std::string& name) const;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
// Throws IoError on bad magic, unknown version, truncation, or an alphabet
// that differs from the built-in one.
Checkpoint read_checkpoint(std::istream& in, const std::string& source = "<stream>");

// File forms; the writer goes through a temporary file and a rename.
void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace charembed
