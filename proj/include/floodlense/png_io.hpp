// Copyright 2026 The FloodLense Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "floodlense/raster_geo.hpp"

namespace floodlense {

// PNG is the only on-disk raster format. Decoding yields an 8-bit raster with
// 1 channel for grayscale sources and 3 channels for everything else (alpha is
// composited away, palettes expanded, 16-bit reduced).

ImageRaster decode_png(std::span<const std::uint8_t> bytes);
ImageRaster read_png(const std::filesystem::path& path);

/// Normalized rasters are quantized to 8 bits first. Only 1- and 3-channel
/// rasters can be encoded.
std::vector<std::uint8_t> encode_png(const ImageRaster& img);
void write_png(const ImageRaster& img, const std::filesystem::path& path);

ImageRaster mask_to_raster(const BinaryMask& mask);

}  // namespace floodlense
