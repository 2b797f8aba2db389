// Copyright 2026 The FloodLense Authors
// SPDX-License-Identifier: Apache-2.0

#include "floodlense/png_io.hpp"

#include <png.h>

#include <cstring>
#include <fstream>
#include <iterator>

#include <fmt/format.h>

#include "floodlense/error.hpp"

namespace floodlense {

namespace {

struct PngImageGuard {
  png_image image;
  PngImageGuard() {
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
  }
  ~PngImageGuard() { png_image_free(&image); }
  PngImageGuard(const PngImageGuard&) = delete;
  PngImageGuard& operator=(const PngImageGuard&) = delete;
};

}  // namespace

ImageRaster decode_png(std::span<const std::uint8_t> bytes) {
  PngImageGuard g;
  if (!png_image_begin_read_from_memory(&g.image, bytes.data(), bytes.size())) {
    throw Error(ErrorCode::DecodeError, fmt::format("not a PNG: {}", g.image.message));
  }
  const bool gray = (g.image.format & PNG_FORMAT_FLAG_COLOR) == 0;
  g.image.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  const int channels = gray ? 1 : 3;
  const int width = static_cast<int>(g.image.width);
  const int height = static_cast<int>(g.image.height);
  std::vector<std::uint8_t> samples(PNG_IMAGE_SIZE(g.image));
  // Black background for any alpha channel.
  png_color background{0, 0, 0};
  if (!png_image_finish_read(&g.image, &background, samples.data(), 0, nullptr)) {
    throw Error(ErrorCode::DecodeError, fmt::format("PNG decode failed: {}", g.image.message));
  }
  return ImageRaster::from_u8(width, height, channels, std::move(samples));
}

ImageRaster read_png(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, fmt::format("cannot open {}", path.string()));
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_png(bytes);
  } catch (const Error& e) {
    throw Error(ErrorCode::DecodeError, fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::vector<std::uint8_t> encode_png(const ImageRaster& img_in) {
  const ImageRaster img = to_u8(img_in);
  if (img.channels() != 1 && img.channels() != 3) {
    throw Error(ErrorCode::InvalidInput,
                fmt::format("cannot encode {}-channel raster as PNG", img.channels()));
  }
  PngImageGuard g;
  g.image.width = static_cast<png_uint_32>(img.width());
  g.image.height = static_cast<png_uint_32>(img.height());
  g.image.format = img.channels() == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;

  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(g.image, size, 0, img.u8().data(), 0, nullptr)) {
    throw Error(ErrorCode::IoError, fmt::format("PNG encode failed: {}", g.image.message));
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&g.image, out.data(), &size, 0, img.u8().data(), 0, nullptr)) {
    throw Error(ErrorCode::IoError, fmt::format("PNG encode failed: {}", g.image.message));
  }
  out.resize(size);
  return out;
}

void write_png(const ImageRaster& img, const std::filesystem::path& path) {
  const auto bytes = encode_png(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, fmt::format("cannot write {}", path.string()));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, fmt::format("short write to {}", path.string()));
}

ImageRaster mask_to_raster(const BinaryMask& mask) {
  std::vector<std::uint8_t> samples(mask.size());
  const auto bits = mask.bits();
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = bits[i] ? 255 : 0;
  return ImageRaster::from_u8(mask.width(), mask.height(), 1, std::move(samples));
}

}  // namespace floodlense
