// Copyright 2026 The FloodLense Authors
// SPDX-License-Identifier: Apache-2.0

#include "floodlense/weights.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include <fmt/format.h>

#include "floodlense/error.hpp"

namespace floodlense {

namespace {

constexpr char kMagic[4] = {'F', 'L', 'W', 'T'};
constexpr std::uint32_t kVersion = 1;

std::uint64_t element_count(const std::vector<std::uint32_t>& shape) {
  std::uint64_t n = 1;
  for (auto d : shape) {
    if (d != 0 && n > std::numeric_limits<std::uint64_t>::max() / d) {
      throw Error(ErrorCode::FormatError, "tensor shape overflows");
    }
    n *= d;
  }
  return n;
}

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void bytes(std::string_view s) { out_.insert(out_.end(), s.begin(), s.end()); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() { return need(1)[0]; }
  std::uint16_t u16() {
    const auto* p = need(2);
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
  }
  std::uint32_t u32() {
    const auto* p = need(4);
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string str(std::size_t n) {
    const auto* p = need(n);
    return std::string(reinterpret_cast<const char*>(p), n);
  }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  const std::uint8_t* need(std::size_t n) {
    if (remaining() < n) {
      throw Error(ErrorCode::FormatError,
                  fmt::format("truncated weight file: need {} bytes at offset {}", n, pos_));
    }
    const auto* p = in_.data() + pos_;
    pos_ += n;
    return p;
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

void WeightArchive::add(std::string name, std::vector<std::uint32_t> shape, std::vector<float> values) {
  if (name.empty() || name.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw Error(ErrorCode::FormatError, "weight name must be 1..65535 bytes");
  }
  if (shape.size() > std::numeric_limits<std::uint8_t>::max()) {
    throw Error(ErrorCode::FormatError, "too many dimensions");
  }
  if (find(name) != nullptr) throw Error(ErrorCode::FormatError, fmt::format("duplicate weight '{}'", name));
  if (element_count(shape) != values.size()) {
    throw Error(ErrorCode::FormatError,
                fmt::format("weight '{}' has {} values for {} shape elements", name, values.size(),
                            element_count(shape)));
  }
  for (float v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::FormatError, fmt::format("weight '{}' is not finite", name));
  }
  entries_.push_back(WeightEntry{std::move(name), std::move(shape), std::move(values)});
}

const WeightEntry* WeightArchive::find(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

WeightEntry* WeightArchive::find_mutable(std::string_view name) {
  for (auto& e : entries_) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

bool WeightArchive::bit_equal(const WeightArchive& other) const {
  return serialize_weights(*this) == serialize_weights(other);
}

std::vector<std::uint8_t> serialize_weights(const WeightArchive& archive) {
  Writer w;
  w.bytes(std::string_view(kMagic, 4));
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(archive.entries().size()));
  for (const auto& e : archive.entries()) {
    w.u16(static_cast<std::uint16_t>(e.name.size()));
    w.bytes(e.name);
    w.u8(static_cast<std::uint8_t>(e.shape.size()));
    for (auto d : e.shape) w.u32(d);
    for (float v : e.values) w.f32(v);
  }
  return w.take();
}

WeightArchive parse_weights(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (r.str(4) != std::string_view(kMagic, 4)) throw Error(ErrorCode::FormatError, "bad magic");
  const auto version = r.u32();
  if (version != kVersion) throw Error(ErrorCode::FormatError, fmt::format("unsupported version {}", version));
  const auto count = r.u32();
  WeightArchive archive;
  for (std::uint32_t i = 0; i < count; ++i) {
    auto name = r.str(r.u16());
    const auto ndim = r.u8();
    std::vector<std::uint32_t> shape(ndim);
    for (auto& d : shape) d = r.u32();
    const auto n = element_count(shape);
    if (n > r.remaining() / 4) {
      throw Error(ErrorCode::FormatError, fmt::format("truncated values for '{}'", name));
    }
    std::vector<float> values(n);
    for (auto& v : values) v = r.f32();
    archive.add(std::move(name), std::move(shape), std::move(values));
  }
  if (r.remaining() != 0) {
    throw Error(ErrorCode::FormatError, fmt::format("{} trailing bytes", r.remaining()));
  }
  return archive;
}

void save_weights(const WeightArchive& archive, const std::filesystem::path& path) {
  const auto bytes = serialize_weights(archive);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, fmt::format("cannot write {}", path.string()));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, fmt::format("short write to {}", path.string()));
}

WeightArchive load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, fmt::format("cannot open {}", path.string()));
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_weights(bytes);
}

}  // namespace floodlense
