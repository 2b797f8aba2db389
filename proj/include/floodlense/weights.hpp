// Copyright 2026 The FloodLense Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace floodlense {

struct WeightEntry {
  std::string name;
  std::vector<std::uint32_t> shape;
  std::vector<float> values;

  friend bool operator==(const WeightEntry&, const WeightEntry&) = default;
};

/// Ordered named tensors. Names are unique, value counts match shapes and
/// every value is finite.
class WeightArchive {
 public:
  void add(std::string name, std::vector<std::uint32_t> shape, std::vector<float> values);

  const std::vector<WeightEntry>& entries() const { return entries_; }
  const WeightEntry* find(std::string_view name) const;
  WeightEntry* find_mutable(std::string_view name);

  /// Byte-level equality, so NaN payloads and signed zeros are compared exactly.
  bool bit_equal(const WeightArchive& other) const;

 private:
  std::vector<WeightEntry> entries_;
};

// Little-endian layout:
//   "FLWT" | u32 version (1) | u32 entry_count |
//   per entry: u16 name_len | name bytes | u8 ndim | u32 dims[ndim] | f32 values[prod(dims)]
std::vector<std::uint8_t> serialize_weights(const WeightArchive& archive);
WeightArchive parse_weights(std::span<const std::uint8_t> bytes);

void save_weights(const WeightArchive& archive, const std::filesystem::path& path);
WeightArchive load_weights(const std::filesystem::path& path);

}  // namespace floodlense
