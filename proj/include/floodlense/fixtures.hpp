// Copyright 2026 The FloodLense Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "floodlense/location.hpp"
#include "floodlense/raster_geo.hpp"
#include "floodlense/rng.hpp"
#include "floodlense/segmentation.hpp"

namespace floodlense {

struct FixturePaths {
  std::filesystem::path root;
  std::filesystem::path dataset;  // images/ + masks/
  std::filesystem::path gazetteer;
  std::filesystem::path tiles;
  std::filesystem::path zero_weights;
  std::filesystem::path random_weights;
  std::filesystem::path demo_weights;
  std::filesystem::path interface_cases;
  std::filesystem::path config;
  std::filesystem::path image_store;
};

inline constexpr std::uint64_t kDefaultSeed = 42;
inline constexpr int kFixtureSamples = 6;
inline constexpr int kFixtureSampleSize = 128;

/// Writes the whole offline fixture set under `out`. Same seed, same bytes.
FixturePaths make_fixtures(const std::filesystem::path& out, std::uint64_t seed = kDefaultSeed);

Gazetteer fixture_gazetteer();
std::vector<InterfaceCase> fixture_interface_cases();

/// Synthetic true-color scene: textured land, vegetation patches, water
/// bodies. The mask marks water.
std::pair<ImageRaster, BinaryMask> synthesize_scene(int width, int height, Rng& rng);

/// Hand-set UNet parameters that route relu(blue - red) through the
/// shallowest encoder/decoder path into the head; every other layer is zero.
WeightArchive make_demo_unet_weights(const UNetConfig& cfg);

}  // namespace floodlense
