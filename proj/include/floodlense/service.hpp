// Copyright 2026 The FloodLense Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "floodlense/error.hpp"
#include "floodlense/imagery.hpp"
#include "floodlense/location.hpp"
#include "floodlense/segmentation.hpp"

namespace httplib {
class Server;
}

namespace floodlense {

enum class BackendMode { Fixture, Live };

struct ServiceConfig {
  int port = 8080;
  std::filesystem::path image_dir = "image_store";
  std::string base_url;  // empty: http://localhost:<port>/images
  std::filesystem::path gazetteer_path = "gazetteer.jsonl";
  double half_extent_deg = 0.05;
  GeoPoint default_point{13.0827, 80.2707};  // Chennai
  double default_threshold = 0.5;
  BackendMode backend_mode = BackendMode::Fixture;
  std::filesystem::path weight_path;
  std::string engine = "unet";  // or "classical"

  std::filesystem::path tile_store = "tiles";
  int scene_size = 256;
  std::string cors_origin = "*";

  std::string sentinel_base_url = "https://services.sentinel-hub.com";
  std::string sentinel_instance_id;
  std::string nominatim_url = "https://nominatim.openstreetmap.org";
  std::string llm_base_url = "https://api.openai.com";
  std::string llm_model = "gpt-3.5-turbo";
  std::string llm_api_key;

  /// Throws InvalidInput on out-of-range values.
  void validate() const;
  /// Prefix of persisted image URLs.
  std::string image_base_url() const;
};

/// JSON keys mirror the field names; relative paths resolve against the
/// config file's directory. Environment overrides are applied afterwards:
/// FLOODLENSE_PORT, FLOODLENSE_SH_KEY (Sentinel instance id), FLOODLENSE_LLM_KEY.
ServiceConfig load_service_config(const std::filesystem::path& path);
ServiceConfig parse_service_config(std::string_view json_text, const std::filesystem::path& base_dir);
void apply_env_overrides(ServiceConfig& cfg);

std::shared_ptr<const SegmentationEngine> make_engine(const ServiceConfig& cfg);

/// Everything between a coordinate and the highlighted scene.
struct FloodAnalysis {
  BoundingBox bbox;
  SceneMeta scene;
  ImageRaster image;  // processed 8-bit RGB
  BinaryMask mask;
  ImageRaster overlay;
  double flood_fraction = 0.0;
};

/// bbox_around -> fetch_latest -> process_scene -> predict -> binarize -> overlay.
FloodAnalysis analyze_location(const GeoPoint& center, double half_extent_deg, int scene_size,
                               const TileBackend& tiles, const SegmentationEngine& engine, double threshold);

struct HttpResult {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

struct QueryResult {
  std::string location_name;
  double lat = 0.0;
  double lon = 0.0;
  std::string image_url;
  std::string overlay_url;
  double flood_fraction = 0.0;
  std::string message;
};

/// Maps library error codes onto the service's status table.
int http_status_for(ErrorCode code);

class FloodService {
 public:
  FloodService(ServiceConfig cfg, std::shared_ptr<const LocationExtractor> extractor,
               std::shared_ptr<const Geocoder> geocoder, std::shared_ptr<const TileBackend> tiles,
               std::shared_ptr<const SegmentationEngine> engine);

  /// Builds fixture or live backends as configured.
  static std::shared_ptr<const FloodService> from_config(const ServiceConfig& cfg);

  // Absent parameters fall back to config defaults.
  HttpResult download_image(const std::optional<std::string>& lat, const std::optional<std::string>& lon) const;
  HttpResult segment(const std::optional<std::string>& lat, const std::optional<std::string>& lon,
                     const std::optional<std::string>& threshold) const;
  HttpResult query(const std::string& body) const;
  HttpResult image(const std::string& name) const;

  /// Handlers capture this; the service must outlive the server.
  void register_routes(httplib::Server& server) const;
  /// Blocks until the server stops.
  void serve() const;

  const ServiceConfig& config() const { return cfg_; }

 private:
  GeoPoint resolve_point(const std::optional<std::string>& lat, const std::optional<std::string>& lon) const;
  struct Segmented {
    ImageStoreRecord image;
    ImageStoreRecord overlay;
    double flood_fraction;
  };
  Segmented segment_point(const GeoPoint& point, double threshold) const;

  ServiceConfig cfg_;
  std::shared_ptr<const LocationExtractor> extractor_;
  std::shared_ptr<const Geocoder> geocoder_;
  std::shared_ptr<const TileBackend> tiles_;
  std::shared_ptr<const SegmentationEngine> engine_;
};

}  // namespace floodlense
