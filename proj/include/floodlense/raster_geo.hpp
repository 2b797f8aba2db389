// Copyright 2026 The FloodLense Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace floodlense {

/// WGS84 coordinate in degrees. Construct through make() to get range checks.
struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  static GeoPoint make(double lat, double lon);

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// Axis-aligned lat/lon extent. Never crosses the antimeridian.
struct BoundingBox {
  double min_lon = 0.0;
  double min_lat = 0.0;
  double max_lon = 0.0;
  double max_lat = 0.0;

  static BoundingBox make(double min_lon, double min_lat, double max_lon, double max_lat);

  bool contains(const GeoPoint& p) const;
  GeoPoint center() const;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

enum class SampleFormat { U8, Normalized };

/// Row-major, channel-interleaved pixel grid. Samples are either 8-bit
/// integers or reals in [0,1]; only the buffer matching format() is populated.
class ImageRaster {
 public:
  ImageRaster() = default;

  static ImageRaster from_u8(int width, int height, int channels, std::vector<std::uint8_t> samples);
  static ImageRaster from_normalized(int width, int height, int channels, std::vector<float> samples);
  static ImageRaster filled_u8(int width, int height, int channels, std::uint8_t value);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  SampleFormat format() const { return format_; }
  bool is_normalized() const { return format_ == SampleFormat::Normalized; }
  std::size_t sample_count() const {
    return static_cast<std::size_t>(width_) * height_ * channels_;
  }

  std::span<const std::uint8_t> u8() const { return u8_; }
  std::span<const float> normalized() const { return real_; }

  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }
  std::uint8_t u8_at(int x, int y, int c) const { return u8_[index(x, y, c)]; }
  float normalized_at(int x, int y, int c) const { return real_[index(x, y, c)]; }

  /// Sample as a real regardless of format (raw 0..255 for U8).
  double value_at(int x, int y, int c) const {
    return format_ == SampleFormat::U8 ? u8_[index(x, y, c)] : real_[index(x, y, c)];
  }

  friend bool operator==(const ImageRaster&, const ImageRaster&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  SampleFormat format_ = SampleFormat::U8;
  std::vector<std::uint8_t> u8_;
  std::vector<float> real_;
};

/// Per-pixel water likelihood in [0,1].
class ProbabilityMap {
 public:
  ProbabilityMap() = default;
  ProbabilityMap(int width, int height, std::vector<float> values);
  static ProbabilityMap constant(int width, int height, float value);

  int width() const { return width_; }
  int height() const { return height_; }
  std::span<const float> values() const { return values_; }
  float at(int x, int y) const { return values_[static_cast<std::size_t>(y) * width_ + x]; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<float> values_;
};

/// true = water/flood.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, std::vector<std::uint8_t> bits);
  static BinaryMask filled(int width, int height, bool value);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return bits_.size(); }
  std::span<const std::uint8_t> bits() const { return bits_; }
  bool at(int x, int y) const { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  std::size_t count_positive() const;
  double positive_fraction() const;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

BoundingBox bbox_around(const GeoPoint& center, double half_extent_deg);

/// Output pixel (x, y) copies source pixel (floor(x*src_w/dst_w), floor(y*src_h/dst_h)).
ImageRaster nearest_resize(const ImageRaster& src, int target_w, int target_h);

/// Maps every 8-bit sample v to v/255.
ImageRaster normalize(const ImageRaster& src);

/// Inverse of normalize, rounding to the nearest 8-bit level. U8 input is returned as is.
ImageRaster to_u8(const ImageRaster& src);

}  // namespace floodlense
