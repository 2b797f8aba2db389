// Copyright 2026 The FloodLense Authors
// SPDX-License-Identifier: Apache-2.0

#include "floodlense/live_clients.hpp"

#include <charconv>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

#include "floodlense/error.hpp"
#include "floodlense/png_io.hpp"

namespace floodlense {

namespace {

using nlohmann::json;

constexpr const char* kUserAgent = "floodlense/1.0";

httplib::Client make_client(const std::string& origin) {
  httplib::Client cli(origin);
  cli.set_connection_timeout(10, 0);
  cli.set_read_timeout(30, 0);
  cli.set_follow_location(true);
  return cli;
}

double parse_coordinate(const json& v) {
  if (v.is_number()) return v.get<double>();
  const auto s = v.get<std::string>();
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::ServiceError, fmt::format("bad coordinate '{}'", s));
  }
  return out;
}

std::string bbox_param(const BoundingBox& b) {
  return fmt::format("{:.6f},{:.6f},{:.6f},{:.6f}", b.min_lon, b.min_lat, b.max_lon, b.max_lat);
}

}  // namespace

UrlParts split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::InvalidInput, fmt::format("URL '{}' has no scheme", url));
  }
  const auto path_start = url.find('/', scheme_end + 3);
  UrlParts parts;
  parts.origin = url.substr(0, path_start);
  if (path_start != std::string::npos) parts.path_prefix = url.substr(path_start);
  while (!parts.path_prefix.empty() && parts.path_prefix.back() == '/') parts.path_prefix.pop_back();
  return parts;
}

OpenAiChatClient::OpenAiChatClient(std::string base_url, std::string api_key, std::string model)
    : base_url_(std::move(base_url)), api_key_(std::move(api_key)), model_(std::move(model)) {}

std::string OpenAiChatClient::complete(const std::string& system_prompt,
                                       const std::string& user_text) const {
  const auto url = split_url(base_url_);
  auto cli = make_client(url.origin);
  const json body = {
      {"model", model_},
      {"temperature", 0},
      {"messages",
       json::array({{{"role", "system"}, {"content", system_prompt}},
                    {{"role", "user"}, {"content", user_text}}})},
  };
  httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}, {"User-Agent", kUserAgent}};
  auto res = cli.Post(url.path_prefix + "/v1/chat/completions", headers, body.dump(), "application/json");
  if (!res) {
    throw Error(ErrorCode::BackendUnavailable,
                fmt::format("chat request failed: {}", httplib::to_string(res.error())));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::BackendUnavailable, fmt::format("chat endpoint returned {}", res->status));
  }
  try {
    const auto j = json::parse(res->body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BackendUnavailable, fmt::format("malformed chat response: {}", e.what()));
  }
}

NominatimGeocoder::NominatimGeocoder(std::string base_url) : base_url_(std::move(base_url)) {}

GeoPoint NominatimGeocoder::geocode(std::string_view name) const {
  if (name.empty()) throw Error(ErrorCode::InvalidInput, "empty location name");
  const auto url = split_url(base_url_);
  auto cli = make_client(url.origin);
  httplib::Params params = {{"q", std::string(name)}, {"format", "json"}, {"limit", "1"}};
  auto res = cli.Get(url.path_prefix + "/search", params, {{"User-Agent", kUserAgent}});
  if (!res) {
    throw Error(ErrorCode::ServiceError,
                fmt::format("geocoder request failed: {}", httplib::to_string(res.error())));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::ServiceError, fmt::format("geocoder returned {}", res->status));
  }
  json results;
  try {
    results = json::parse(res->body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ServiceError, fmt::format("malformed geocoder response: {}", e.what()));
  }
  if (!results.is_array()) throw Error(ErrorCode::ServiceError, "geocoder response is not an array");
  if (results.empty()) {
    throw Error(ErrorCode::NotFound, fmt::format("geocoder has no match for '{}'", std::string(name)));
  }
  try {
    const auto& first = results.at(0);
    return GeoPoint::make(parse_coordinate(first.at("lat")), parse_coordinate(first.at("lon")));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ServiceError, fmt::format("malformed geocoder result: {}", e.what()));
  } catch (const Error& e) {
    throw Error(ErrorCode::ServiceError, e.what());
  }
}

SentinelHubTiles::SentinelHubTiles(SentinelHubConfig config) : config_(std::move(config)) {}

std::vector<SceneMeta> SentinelHubTiles::scenes(const BoundingBox& bbox) const {
  using namespace std::chrono;
  const auto url = split_url(config_.base_url);
  auto cli = make_client(url.origin);
  const auto now = floor<seconds>(system_clock::now());
  const auto from = now - days{config_.lookback_days};
  httplib::Params params = {
      {"SERVICE", "WFS"},
      {"REQUEST", "GetFeature"},
      {"TYPENAMES", "DSS2"},
      {"SRSNAME", "CRS:84"},
      {"BBOX", bbox_param(bbox)},
      {"TIME", format_iso8601(from) + "/" + format_iso8601(now)},
      {"MAXCC", std::to_string(config_.max_cloud_coverage)},
      {"OUTPUTFORMAT", "application/json"},
  };
  auto res = cli.Get(url.path_prefix + "/ogc/wfs/" + config_.instance_id, params,
                     {{"User-Agent", kUserAgent}});
  if (!res) {
    throw Error(ErrorCode::ServiceError,
                fmt::format("scene search failed: {}", httplib::to_string(res.error())));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::ServiceError, fmt::format("scene search returned {}", res->status));
  }
  std::vector<SceneMeta> out;
  try {
    const auto j = json::parse(res->body);
    for (const auto& feature : j.at("features")) {
      const auto& props = feature.at("properties");
      const auto date = props.at("date").get<std::string>();
      const auto time = props.value("time", std::string("00:00:00"));
      const auto stamp = parse_iso8601(date + "T" + time.substr(0, 8) + "Z");
      out.push_back(SceneMeta::make(stamp, props.value("id", date + "T" + time)));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ServiceError, fmt::format("malformed scene search response: {}", e.what()));
  } catch (const Error& e) {
    throw Error(ErrorCode::ServiceError, e.what());
  }
  return out;
}

ImageRaster SentinelHubTiles::load(const BoundingBox& bbox, const SceneMeta& scene) const {
  const auto url = split_url(config_.base_url);
  auto cli = make_client(url.origin);
  const auto date = format_iso8601(scene.acquired_at).substr(0, 10);
  const auto size = std::to_string(config_.image_size);
  httplib::Params params = {
      {"SERVICE", "WMS"},     {"REQUEST", "GetMap"},      {"VERSION", "1.3.0"},
      {"LAYERS", "TRUE-COLOR"}, {"CRS", "CRS:84"},        {"BBOX", bbox_param(bbox)},
      {"WIDTH", size},        {"HEIGHT", size},           {"FORMAT", "image/png"},
      {"TIME", date + "/" + date}, {"MAXCC", std::to_string(config_.max_cloud_coverage)},
  };
  auto res = cli.Get(url.path_prefix + "/ogc/wms/" + config_.instance_id, params,
                     {{"User-Agent", kUserAgent}});
  if (!res) {
    throw Error(ErrorCode::ServiceError,
                fmt::format("scene download failed: {}", httplib::to_string(res.error())));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::ServiceError, fmt::format("scene download returned {}", res->status));
  }
  const auto* data = reinterpret_cast<const std::uint8_t*>(res->body.data());
  try {
    auto img = decode_png({data, res->body.size()});
    if (img.channels() != 3) throw Error(ErrorCode::ServiceError, "scene is not RGB");
    return img;
  } catch (const Error& e) {
    throw Error(ErrorCode::ServiceError, e.what());
  }
}

}  // namespace floodlense
