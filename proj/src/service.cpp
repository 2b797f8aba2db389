// Copyright 2026 The FloodLense Authors
// SPDX-License-Identifier: Apache-2.0

#include "floodlense/service.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <regex>
#include <sstream>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "floodlense/error.hpp"
#include "floodlense/live_clients.hpp"
#include "floodlense/weights.hpp"

namespace floodlense {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, fmt::format("cannot read {}", path.string()));
  return std::string(std::istreambuf_iterator<char>(in), {});
}

fs::path resolve(const fs::path& base, const fs::path& p) {
  if (p.empty() || p.is_absolute()) return p;
  return base / p;
}

double parse_number(std::string_view name, std::string_view text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc{} || ptr != end || !std::isfinite(v)) {
    throw Error(ErrorCode::InvalidInput, fmt::format("{} is not a number: '{}'", name, text));
  }
  return v;
}

HttpResult json_result(int status, const json& body) { return {status, "application/json", body.dump()}; }

HttpResult error_result(const Error& e) {
  return json_result(http_status_for(e.code()), {{"error", to_string(e.code())}, {"message", e.what()}});
}

template <typename Fn>
HttpResult guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    spdlog::warn("request failed: {}", e.what());
    return error_result(e);
  } catch (const std::exception& e) {
    spdlog::error("unexpected failure: {}", e.what());
    return json_result(500, {{"error", "Internal"}, {"message", e.what()}});
  }
}

std::optional<std::string> param(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) return std::nullopt;
  return req.get_param_value(key);
}

void send(httplib::Response& res, const HttpResult& r) {
  res.status = r.status;
  res.set_content(r.body, r.content_type);
}

}  // namespace

void ServiceConfig::validate() const {
  auto bad = [](std::string msg) { throw Error(ErrorCode::InvalidInput, std::move(msg)); };
  if (port < 1 || port > 65535) bad(fmt::format("port {} outside [1, 65535]", port));
  if (!(half_extent_deg > 0.0 && half_extent_deg <= 10.0)) {
    bad(fmt::format("half_extent_deg {} outside (0, 10]", half_extent_deg));
  }
  if (!(default_threshold > 0.0 && default_threshold < 1.0)) {
    bad(fmt::format("default_threshold {} outside (0, 1)", default_threshold));
  }
  if (scene_size < 1 || scene_size > 4096) bad(fmt::format("scene_size {} outside [1, 4096]", scene_size));
  if (engine != "unet" && engine != "classical") bad(fmt::format("unknown engine '{}'", engine));
  if (engine == "unet" && weight_path.empty()) bad("engine 'unet' needs weight_path");
  GeoPoint::make(default_point.lat, default_point.lon);
}

std::string ServiceConfig::image_base_url() const {
  return base_url.empty() ? fmt::format("http://localhost:{}/images", port) : base_url;
}

ServiceConfig parse_service_config(std::string_view json_text, const fs::path& base_dir) {
  ServiceConfig cfg;
  try {
    const auto j = json::parse(json_text);
    if (!j.is_object()) throw Error(ErrorCode::FormatError, "config must be a JSON object");
    auto str = [&](const char* key, std::string& out) {
      if (j.contains(key)) out = j.at(key).get<std::string>();
    };
    auto path = [&](const char* key, fs::path& out) {
      if (j.contains(key)) out = j.at(key).get<std::string>();
      out = resolve(base_dir, out);
    };
    if (j.contains("port")) cfg.port = j.at("port").get<int>();
    path("image_dir", cfg.image_dir);
    str("base_url", cfg.base_url);
    path("gazetteer_path", cfg.gazetteer_path);
    if (j.contains("half_extent_deg")) cfg.half_extent_deg = j.at("half_extent_deg").get<double>();
    if (j.contains("default_point")) {
      const auto& p = j.at("default_point");
      cfg.default_point = GeoPoint::make(p.at("lat").get<double>(), p.at("lon").get<double>());
    }
    if (j.contains("default_threshold")) cfg.default_threshold = j.at("default_threshold").get<double>();
    if (j.contains("backend_mode")) {
      const auto mode = j.at("backend_mode").get<std::string>();
      if (mode == "fixture") {
        cfg.backend_mode = BackendMode::Fixture;
      } else if (mode == "live") {
        cfg.backend_mode = BackendMode::Live;
      } else {
        throw Error(ErrorCode::InvalidInput, fmt::format("unknown backend_mode '{}'", mode));
      }
    }
    path("weight_path", cfg.weight_path);
    str("engine", cfg.engine);
    path("tile_store", cfg.tile_store);
    if (j.contains("scene_size")) cfg.scene_size = j.at("scene_size").get<int>();
    str("cors_origin", cfg.cors_origin);
    str("sentinel_base_url", cfg.sentinel_base_url);
    str("sentinel_instance_id", cfg.sentinel_instance_id);
    str("nominatim_url", cfg.nominatim_url);
    str("llm_base_url", cfg.llm_base_url);
    str("llm_model", cfg.llm_model);
    str("llm_api_key", cfg.llm_api_key);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, fmt::format("bad config: {}", e.what()));
  }
  return cfg;
}

void apply_env_overrides(ServiceConfig& cfg) {
  if (const char* port = std::getenv("FLOODLENSE_PORT"); port && *port) {
    cfg.port = static_cast<int>(parse_number("FLOODLENSE_PORT", port));
  }
  if (const char* key = std::getenv("FLOODLENSE_SH_KEY"); key && *key) cfg.sentinel_instance_id = key;
  if (const char* key = std::getenv("FLOODLENSE_LLM_KEY"); key && *key) cfg.llm_api_key = key;
}

ServiceConfig load_service_config(const fs::path& path) {
  auto cfg = parse_service_config(read_file(path), path.parent_path());
  apply_env_overrides(cfg);
  cfg.validate();
  return cfg;
}

std::shared_ptr<const SegmentationEngine> make_engine(const ServiceConfig& cfg) {
  if (cfg.engine == "classical") return std::make_shared<ClassicalEngine>();
  return UNetEngine::from_archive("unet", load_weights(cfg.weight_path));
}

FloodAnalysis analyze_location(const GeoPoint& center, double half_extent_deg, int scene_size,
                               const TileBackend& tiles, const SegmentationEngine& engine, double threshold) {
  const auto bbox = bbox_around(center, half_extent_deg);
  auto [raw, scene] = fetch_latest(bbox, tiles);
  auto image = process_scene(raw, scene_size);
  const auto mask = binarize(engine.predict(image), threshold);
  auto highlighted = overlay(image, mask);
  const double fraction = mask.positive_fraction();
  return FloodAnalysis{bbox, std::move(scene), std::move(image), mask, std::move(highlighted), fraction};
}

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput:
    case ErrorCode::AntimeridianCrossing:
      return 400;
    case ErrorCode::NotFound:
    case ErrorCode::NoSceneAvailable:
      return 404;
    case ErrorCode::NoLocationFound:
      return 422;
    case ErrorCode::BackendUnavailable:
    case ErrorCode::ServiceError:
      return 502;
    default:
      return 500;
  }
}

FloodService::FloodService(ServiceConfig cfg, std::shared_ptr<const LocationExtractor> extractor,
                           std::shared_ptr<const Geocoder> geocoder, std::shared_ptr<const TileBackend> tiles,
                           std::shared_ptr<const SegmentationEngine> engine)
    : cfg_(std::move(cfg)),
      extractor_(std::move(extractor)),
      geocoder_(std::move(geocoder)),
      tiles_(std::move(tiles)),
      engine_(std::move(engine)) {
  if (!extractor_ || !geocoder_ || !tiles_ || !engine_) {
    throw Error(ErrorCode::InvalidInput, "service components must not be null");
  }
  std::error_code ec;
  fs::create_directories(cfg_.image_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, fmt::format("cannot create {}: {}", cfg_.image_dir.string(), ec.message()));
}

std::shared_ptr<const FloodService> FloodService::from_config(const ServiceConfig& cfg) {
  cfg.validate();
  auto engine = make_engine(cfg);
  if (cfg.backend_mode == BackendMode::Fixture) {
    auto gazetteer = std::make_shared<const Gazetteer>(Gazetteer::load(cfg.gazetteer_path));
    return std::make_shared<const FloodService>(cfg, std::make_shared<GazetteerExtractor>(gazetteer),
                                                std::make_shared<GazetteerGeocoder>(gazetteer),
                                                std::make_shared<FixtureTileStore>(cfg.tile_store), engine);
  }
  if (cfg.sentinel_instance_id.empty()) {
    throw Error(ErrorCode::InvalidInput, "live mode needs a Sentinel Hub instance id (FLOODLENSE_SH_KEY)");
  }
  if (cfg.llm_api_key.empty()) throw Error(ErrorCode::InvalidInput, "live mode needs FLOODLENSE_LLM_KEY");
  auto chat = std::make_shared<OpenAiChatClient>(cfg.llm_base_url, cfg.llm_api_key, cfg.llm_model);
  SentinelHubConfig sh;
  sh.base_url = cfg.sentinel_base_url;
  sh.instance_id = cfg.sentinel_instance_id;
  sh.image_size = std::max(cfg.scene_size, 512);
  return std::make_shared<const FloodService>(cfg, std::make_shared<LlmExtractor>(chat),
                                              std::make_shared<NominatimGeocoder>(cfg.nominatim_url),
                                              std::make_shared<SentinelHubTiles>(sh), engine);
}

GeoPoint FloodService::resolve_point(const std::optional<std::string>& lat,
                                     const std::optional<std::string>& lon) const {
  if (lat.has_value() != lon.has_value()) {
    throw Error(ErrorCode::InvalidInput, "lat and lon must be given together");
  }
  if (!lat) return cfg_.default_point;
  return GeoPoint::make(parse_number("lat", *lat), parse_number("lon", *lon));
}

FloodService::Segmented FloodService::segment_point(const GeoPoint& point, double threshold) const {
  const auto started = std::chrono::steady_clock::now();
  const auto a = analyze_location(point, cfg_.half_extent_deg, cfg_.scene_size, *tiles_, *engine_, threshold);
  auto image = persist(a.image, cfg_.image_dir, cfg_.image_base_url());
  auto highlighted = persist(a.overlay, cfg_.image_dir, cfg_.image_base_url());
  const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  spdlog::info("segmented ({:.4f}, {:.4f}) scene {} bbox [{:.4f}, {:.4f}, {:.4f}, {:.4f}] water {:.4f} in {:.1f} ms",
               point.lat, point.lon, format_iso8601(a.scene.acquired_at), a.bbox.min_lon, a.bbox.min_lat,
               a.bbox.max_lon, a.bbox.max_lat, a.flood_fraction, ms);
  return {std::move(image), std::move(highlighted), a.flood_fraction};
}

HttpResult FloodService::download_image(const std::optional<std::string>& lat,
                                        const std::optional<std::string>& lon) const {
  return guarded([&] {
    const auto point = resolve_point(lat, lon);
    const auto bbox = bbox_around(point, cfg_.half_extent_deg);
    auto [raw, scene] = fetch_latest(bbox, *tiles_);
    const auto record = persist(process_scene(raw, cfg_.scene_size), cfg_.image_dir, cfg_.image_base_url());
    spdlog::info("downloaded scene {} for ({:.4f}, {:.4f})", format_iso8601(scene.acquired_at), point.lat,
                 point.lon);
    return json_result(200, {{"image_url", record.url},
                             {"acquired_at", format_iso8601(scene.acquired_at)},
                             {"lat", point.lat},
                             {"lon", point.lon}});
  });
}

HttpResult FloodService::segment(const std::optional<std::string>& lat, const std::optional<std::string>& lon,
                                 const std::optional<std::string>& threshold) const {
  return guarded([&] {
    const auto point = resolve_point(lat, lon);
    const double t = threshold ? parse_number("threshold", *threshold) : cfg_.default_threshold;
    const auto s = segment_point(point, t);
    return json_result(200, {{"image_url", s.image.url},
                             {"overlay_url", s.overlay.url},
                             {"flood_fraction", s.flood_fraction},
                             {"threshold", t}});
  });
}

HttpResult FloodService::query(const std::string& body) const {
  return guarded([&] {
    std::string text;
    try {
      const auto j = json::parse(body);
      text = j.at("text").get<std::string>();
    } catch (const json::exception&) {
      throw Error(ErrorCode::InvalidInput, "body must be a JSON object with a string field 'text'");
    }
    spdlog::info("query: {}", text);
    const auto candidate = extract_location(text, *extractor_);
    const auto point = geocode(candidate.name, *geocoder_);
    spdlog::info("resolved '{}' to ({:.4f}, {:.4f})", candidate.name, point.lat, point.lon);
    const auto s = segment_point(point, cfg_.default_threshold);
    QueryResult r{candidate.name,  point.lat, point.lon, s.image.url, s.overlay.url, s.flood_fraction,
                  fmt::format("Latest imagery for {} shows {:.1f}% of the area as water.", candidate.name,
                              100.0 * s.flood_fraction)};
    return json_result(200, {{"location_name", r.location_name},
                             {"lat", r.lat},
                             {"lon", r.lon},
                             {"image_url", r.image_url},
                             {"overlay_url", r.overlay_url},
                             {"flood_fraction", r.flood_fraction},
                             {"message", r.message}});
  });
}

HttpResult FloodService::image(const std::string& name) const {
  return guarded([&] {
    if (name.empty() || name.find('/') != std::string::npos || name.find('\\') != std::string::npos ||
        name.find("..") != std::string::npos) {
      throw Error(ErrorCode::InvalidInput, fmt::format("illegal image name '{}'", name));
    }
    static const std::regex pattern(R"(^sat_[0-9]+_[0-9a-f]{6}\.png$)");
    const auto path = cfg_.image_dir / name;
    if (!std::regex_match(name, pattern) || !fs::is_regular_file(path)) {
      throw Error(ErrorCode::NotFound, fmt::format("no image '{}'", name));
    }
    return HttpResult{200, "image/png", read_file(path)};
  });
}

void FloodService::register_routes(httplib::Server& server) const {
  const std::string origin = cfg_.cors_origin;
  server.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", origin);
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
  });
  server.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  server.set_logger([](const httplib::Request& req, const httplib::Response& res) {
    spdlog::info("{} {} -> {}", req.method, req.path, res.status);
  });
  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string message = "unknown error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      message = e.what();
    } catch (...) {
    }
    res.status = 500;
    res.set_content(json{{"error", "Internal"}, {"message", message}}.dump(), "application/json");
  });

  server.Get("/download_image", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, download_image(param(req, "lat"), param(req, "lon")));
  });
  server.Get("/segment", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, segment(param(req, "lat"), param(req, "lon"), param(req, "threshold")));
  });
  server.Post("/query", [this](const httplib::Request& req, httplib::Response& res) { send(res, query(req.body)); });
  server.Get(R"(/images/(.*))", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, image(req.matches[1].str()));
  });
}

void FloodService::serve() const {
  httplib::Server server;
  register_routes(server);
  spdlog::info("listening on 0.0.0.0:{}", cfg_.port);
  if (!server.listen("0.0.0.0", cfg_.port)) {
    throw Error(ErrorCode::IoError, fmt::format("cannot listen on port {}", cfg_.port));
  }
}

}  // namespace floodlense
