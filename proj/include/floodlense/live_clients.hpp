// Copyright 2026 The FloodLense Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "floodlense/imagery.hpp"
#include "floodlense/location.hpp"

namespace floodlense {

/// Base URL split into what an HTTP client connects to and the path prefix
/// prepended to every request.
struct UrlParts {
  std::string origin;       // scheme://host[:port]
  std::string path_prefix;  // "" or "/something" without trailing slash
};
UrlParts split_url(const std::string& url);

/// OpenAI-compatible chat completion endpoint: POST <base>/v1/chat/completions.
class OpenAiChatClient final : public ChatClient {
 public:
  OpenAiChatClient(std::string base_url, std::string api_key, std::string model = "gpt-3.5-turbo");
  std::string complete(const std::string& system_prompt, const std::string& user_text) const override;

 private:
  std::string base_url_;
  std::string api_key_;
  std::string model_;
};

/// Nominatim-compatible search: GET <base>/search?q=<name>&format=json; first result wins.
class NominatimGeocoder final : public Geocoder {
 public:
  explicit NominatimGeocoder(std::string base_url);
  GeoPoint geocode(std::string_view name) const override;

 private:
  std::string base_url_;
};

struct SentinelHubConfig {
  std::string base_url = "https://services.sentinel-hub.com";
  std::string instance_id;
  int image_size = 512;
  int lookback_days = 30;
  int max_cloud_coverage = 30;
};

/// Sentinel-2 true color via the OGC endpoints of an instance: WFS lists
/// acquisitions over the bbox, WMS GetMap renders one date as PNG.
class SentinelHubTiles final : public TileBackend {
 public:
  explicit SentinelHubTiles(SentinelHubConfig config);
  std::vector<SceneMeta> scenes(const BoundingBox& bbox) const override;
  ImageRaster load(const BoundingBox& bbox, const SceneMeta& scene) const override;

 private:
  SentinelHubConfig config_;
};

}  // namespace floodlense
