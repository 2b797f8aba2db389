// Copyright 2026 The FloodLense Authors
// SPDX-License-Identifier: Apache-2.0

#include "floodlense/raster_geo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "floodlense/error.hpp"

namespace floodlense {

namespace {

void check_dims(int width, int height, int channels) {
  if (width < 1 || height < 1 || channels < 1) {
    throw Error(ErrorCode::BadDimensions,
                fmt::format("raster dims must be positive, got {}x{}x{}", width, height, channels));
  }
}

std::size_t pixel_count(int width, int height) {
  return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
}

}  // namespace

GeoPoint GeoPoint::make(double lat, double lon) {
  if (!std::isfinite(lat) || !std::isfinite(lon) || lat < -90.0 || lat > 90.0 || lon < -180.0 ||
      lon > 180.0) {
    throw Error(ErrorCode::InvalidInput, fmt::format("coordinate out of range: ({}, {})", lat, lon));
  }
  return GeoPoint{lat, lon};
}

BoundingBox BoundingBox::make(double min_lon, double min_lat, double max_lon, double max_lat) {
  for (double v : {min_lon, min_lat, max_lon, max_lat}) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidInput, "bounding box has non-finite bound");
  }
  if (min_lon < -180.0 || max_lon > 180.0 || min_lat < -90.0 || max_lat > 90.0) {
    throw Error(ErrorCode::InvalidInput, "bounding box outside coordinate range");
  }
  if (!(min_lon < max_lon) || !(min_lat < max_lat)) {
    throw Error(ErrorCode::InvalidInput, "bounding box is empty or inverted");
  }
  return BoundingBox{min_lon, min_lat, max_lon, max_lat};
}

bool BoundingBox::contains(const GeoPoint& p) const {
  return p.lon >= min_lon && p.lon <= max_lon && p.lat >= min_lat && p.lat <= max_lat;
}

GeoPoint BoundingBox::center() const {
  return GeoPoint{(min_lat + max_lat) / 2.0, (min_lon + max_lon) / 2.0};
}

ImageRaster ImageRaster::from_u8(int width, int height, int channels,
                                 std::vector<std::uint8_t> samples) {
  check_dims(width, height, channels);
  if (samples.size() != pixel_count(width, height) * channels) {
    throw Error(ErrorCode::ShapeMismatch,
                fmt::format("expected {} samples, got {}", pixel_count(width, height) * channels,
                            samples.size()));
  }
  ImageRaster r;
  r.width_ = width;
  r.height_ = height;
  r.channels_ = channels;
  r.format_ = SampleFormat::U8;
  r.u8_ = std::move(samples);
  return r;
}

ImageRaster ImageRaster::from_normalized(int width, int height, int channels,
                                         std::vector<float> samples) {
  check_dims(width, height, channels);
  if (samples.size() != pixel_count(width, height) * channels) {
    throw Error(ErrorCode::ShapeMismatch,
                fmt::format("expected {} samples, got {}", pixel_count(width, height) * channels,
                            samples.size()));
  }
  for (float v : samples) {
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw Error(ErrorCode::InvalidInput, fmt::format("normalized sample {} outside [0,1]", v));
    }
  }
  ImageRaster r;
  r.width_ = width;
  r.height_ = height;
  r.channels_ = channels;
  r.format_ = SampleFormat::Normalized;
  r.real_ = std::move(samples);
  return r;
}

ImageRaster ImageRaster::filled_u8(int width, int height, int channels, std::uint8_t value) {
  check_dims(width, height, channels);
  return from_u8(width, height, channels,
                 std::vector<std::uint8_t>(pixel_count(width, height) * channels, value));
}

ProbabilityMap::ProbabilityMap(int width, int height, std::vector<float> values)
    : width_(width), height_(height), values_(std::move(values)) {
  check_dims(width, height, 1);
  if (values_.size() != pixel_count(width, height)) {
    throw Error(ErrorCode::ShapeMismatch, "probability map size does not match dims");
  }
  for (float v : values_) {
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw Error(ErrorCode::InvalidInput, fmt::format("probability {} outside [0,1]", v));
    }
  }
}

ProbabilityMap ProbabilityMap::constant(int width, int height, float value) {
  check_dims(width, height, 1);
  return ProbabilityMap(width, height, std::vector<float>(pixel_count(width, height), value));
}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
  check_dims(width, height, 1);
  if (bits_.size() != pixel_count(width, height)) {
    throw Error(ErrorCode::ShapeMismatch, "mask size does not match dims");
  }
  for (auto& b : bits_) b = b != 0 ? 1 : 0;
}

BinaryMask BinaryMask::filled(int width, int height, bool value) {
  check_dims(width, height, 1);
  return BinaryMask(width, height, std::vector<std::uint8_t>(pixel_count(width, height), value));
}

std::size_t BinaryMask::count_positive() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

double BinaryMask::positive_fraction() const {
  if (bits_.empty()) return 0.0;
  return static_cast<double>(count_positive()) / static_cast<double>(bits_.size());
}

BoundingBox bbox_around(const GeoPoint& center, double half_extent_deg) {
  if (!(half_extent_deg > 0.0) || !std::isfinite(half_extent_deg)) {
    throw Error(ErrorCode::InvalidInput, "half extent must be positive");
  }
  const double min_lon = center.lon - half_extent_deg;
  const double max_lon = center.lon + half_extent_deg;
  if (min_lon < -180.0 || max_lon > 180.0) {
    throw Error(ErrorCode::AntimeridianCrossing,
                fmt::format("box around lon {} with half extent {} crosses the antimeridian",
                            center.lon, half_extent_deg));
  }
  const double min_lat = std::max(-90.0, center.lat - half_extent_deg);
  const double max_lat = std::min(90.0, center.lat + half_extent_deg);
  return BoundingBox::make(min_lon, min_lat, max_lon, max_lat);
}

ImageRaster nearest_resize(const ImageRaster& src, int target_w, int target_h) {
  if (target_w < 1 || target_h < 1) {
    throw Error(ErrorCode::BadDimensions, "resize target must be at least 1x1");
  }
  const int sw = src.width();
  const int sh = src.height();
  const int ch = src.channels();

  std::vector<int> col_map(target_w);
  for (int x = 0; x < target_w; ++x) {
    col_map[x] = static_cast<int>(static_cast<std::int64_t>(x) * sw / target_w);
  }

  auto resample = [&](auto samples, auto out) {
    for (int y = 0; y < target_h; ++y) {
      const int sy = static_cast<int>(static_cast<std::int64_t>(y) * sh / target_h);
      for (int x = 0; x < target_w; ++x) {
        const std::size_t s = (static_cast<std::size_t>(sy) * sw + col_map[x]) * ch;
        const std::size_t d = (static_cast<std::size_t>(y) * target_w + x) * ch;
        for (int c = 0; c < ch; ++c) out[d + c] = samples[s + c];
      }
    }
  };

  const std::size_t n = static_cast<std::size_t>(target_w) * target_h * ch;
  if (src.is_normalized()) {
    std::vector<float> out(n);
    resample(src.normalized(), out.data());
    return ImageRaster::from_normalized(target_w, target_h, ch, std::move(out));
  }
  std::vector<std::uint8_t> out(n);
  resample(src.u8(), out.data());
  return ImageRaster::from_u8(target_w, target_h, ch, std::move(out));
}

ImageRaster normalize(const ImageRaster& src) {
  if (src.is_normalized()) throw Error(ErrorCode::AlreadyNormalized, "raster is already normalized");
  const auto in = src.u8();
  std::vector<float> out(in.size());
  std::transform(in.begin(), in.end(), out.begin(),
                 [](std::uint8_t v) { return static_cast<float>(v) / 255.0f; });
  return ImageRaster::from_normalized(src.width(), src.height(), src.channels(), std::move(out));
}

ImageRaster to_u8(const ImageRaster& src) {
  if (!src.is_normalized()) return src;
  const auto in = src.normalized();
  std::vector<std::uint8_t> out(in.size());
  std::transform(in.begin(), in.end(), out.begin(), [](float v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
  });
  return ImageRaster::from_u8(src.width(), src.height(), src.channels(), std::move(out));
}

}  // namespace floodlense
