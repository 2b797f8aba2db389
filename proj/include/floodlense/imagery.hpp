// Copyright 2026 The FloodLense Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "floodlense/raster_geo.hpp"

namespace floodlense {

using UtcTime = std::chrono::sys_seconds;

/// "YYYY-MM-DDTHH:MM:SSZ"
std::string format_iso8601(UtcTime t);
/// Accepts "YYYY-MM-DDTHH:MM:SSZ" and "YYYY-MM-DD"; throws InvalidInput.
UtcTime parse_iso8601(std::string_view text);

struct SceneMeta {
  UtcTime acquired_at;
  std::string source_id;

  /// Rejects acquisition times in the future.
  static SceneMeta make(UtcTime acquired_at, std::string source_id);
};

struct ImageStoreRecord {
  std::filesystem::path file_path;
  std::string url;
  UtcTime stored_at;
};

/// Scene source for a bounding box. Implementations are safe for concurrent
/// use and deliver RGB rasters (band order normalized at this boundary).
class TileBackend {
 public:
  virtual ~TileBackend() = default;
  /// Throws ServiceError on transport failure; an empty list means no coverage.
  virtual std::vector<SceneMeta> scenes(const BoundingBox& bbox) const = 0;
  virtual ImageRaster load(const BoundingBox& bbox, const SceneMeta& scene) const = 0;
};

/// 0.1-degree grid cell holding a point, e.g. "c130_802" for (13.08, 80.27).
std::string cell_id_for(const GeoPoint& p);

/// Directory-backed scenes: <root>/<cell_id>/<iso8601>.png, keyed by the
/// cell of the bbox center.
class FixtureTileStore final : public TileBackend {
 public:
  explicit FixtureTileStore(std::filesystem::path root);
  std::vector<SceneMeta> scenes(const BoundingBox& bbox) const override;
  ImageRaster load(const BoundingBox& bbox, const SceneMeta& scene) const override;

  static std::filesystem::path scene_path(const std::filesystem::path& root,
                                          const std::string& cell_id, UtcTime acquired_at);

 private:
  std::filesystem::path root_;
};

std::pair<ImageRaster, SceneMeta> fetch_latest(const BoundingBox& bbox, const TileBackend& backend);

/// Center-crop to a square, nearest-resize to target x target, emit 8-bit RGB.
ImageRaster process_scene(const ImageRaster& raw, int target);

/// Writes sat_<unix_seconds>_<6 hex>.png under store_dir without ever
/// replacing an existing file.
ImageStoreRecord persist(const ImageRaster& img, const std::filesystem::path& store_dir,
                         std::string_view base_url);

}  // namespace floodlense
