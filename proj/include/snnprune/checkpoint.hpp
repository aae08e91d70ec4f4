#pragma once

#include <map>
#include <string>
#include <vector>

#include "snnprune/tensor.hpp"

namespace snnprune {

/// Self-describing container of named tensors plus a string metadata map.
///
/// Byte layout (all integers and floats little-endian):
///
///     magic        8 bytes  "SNNCKPT\0"
///     version      u32      1
///     meta_count   u32
///     meta_count x { u32 key_len, key bytes, u32 value_len, value bytes }
///     entry_count  u32
///     entry_count x { u32 name_len, name bytes, u32 rank, u64 dims[rank],
///                     f64 data[product(dims)] }
///
/// Metadata and entries are written in lexicographic key order, so a loaded and
/// re-saved container is byte-identical to the original.
struct Checkpoint {
  std::map<std::string, std::string> metadata;
  std::map<std::string, Tensor> entries;

  const std::string& meta(const std::string& key) const;
  std::string meta_or(const std::string& key, const std::string& fallback) const;
  double meta_double(const std::string& key) const;
  long long meta_int(const std::string& key) const;
  const Tensor& entry(const std::string& name) const;
  bool has_entry(const std::string& name) const { return entries.count(name) != 0; }
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

/// Shortest round-trip text for a double.
std::string format_double(double v);

}  // namespace snnprune
