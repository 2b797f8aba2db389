// Copyright 2026 The FloodLense Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <json.hpp>

#include "fake_server.hpp"
#include "floodlense/error.hpp"
#include "floodlense/fixtures.hpp"
#include "floodlense/png_io.hpp"
#include "floodlense/service.hpp"
#include "oracles.hpp"

using namespace floodlense;
using nlohmann::json;

namespace {

struct Fixture {
  std::filesystem::path root = oracle::temp_dir("service");
  FixturePaths paths = make_fixtures(root);
  ServiceConfig cfg = load_service_config(paths.config);
  ~Fixture() { std::filesystem::remove_all(root); }
};

std::shared_ptr<const FloodService> zero_weight_service(const ServiceConfig& cfg) {
  auto gazetteer = std::make_shared<const Gazetteer>(Gazetteer::load(cfg.gazetteer_path));
  return std::make_shared<const FloodService>(
      cfg, std::make_shared<GazetteerExtractor>(gazetteer), std::make_shared<GazetteerGeocoder>(gazetteer),
      std::make_shared<FixtureTileStore>(cfg.tile_store),
      std::make_shared<UNetEngine>("zero", UNetConfig{}, make_zero_unet_weights(UNetConfig{})));
}

std::string name_from_url(const std::string& url) { return url.substr(url.rfind('/') + 1); }

}  // namespace

TEST_CASE("config loading resolves paths and applies environment overrides") {
  Fixture fx;
  CHECK(fx.cfg.tile_store == fx.root / "tiles");
  CHECK(fx.cfg.weight_path == fx.root / "weights" / "demo.flwt");
  CHECK(fx.cfg.backend_mode == BackendMode::Fixture);
  CHECK(fx.cfg.scene_size == 256);

  ::setenv("FLOODLENSE_PORT", "9191", 1);
  ::setenv("FLOODLENSE_SH_KEY", "sh-key", 1);
  ::setenv("FLOODLENSE_LLM_KEY", "llm-key", 1);
  const auto overridden = load_service_config(fx.paths.config);
  ::unsetenv("FLOODLENSE_PORT");
  ::unsetenv("FLOODLENSE_SH_KEY");
  ::unsetenv("FLOODLENSE_LLM_KEY");
  CHECK(overridden.port == 9191);
  CHECK(overridden.sentinel_instance_id == "sh-key");
  CHECK(overridden.llm_api_key == "llm-key");
  CHECK(fx.cfg.image_base_url() == "http://localhost:8080/images");
  CHECK(overridden.image_base_url() == "http://localhost:9191/images");
  auto pinned = fx.cfg;
  pinned.base_url = "https://example.org/img";
  CHECK(pinned.image_base_url() == "https://example.org/img");

  CHECK_THROWS_AS(parse_service_config("{\"backend_mode\": \"cloud\"}", "."), Error);
  CHECK_THROWS_AS(parse_service_config("[1,2]", "."), Error);
  auto bad = fx.cfg;
  bad.default_threshold = 1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  auto no_port = fx.cfg;
  no_port.port = 0;
  CHECK_THROWS_AS(no_port.validate(), Error);
}

TEST_CASE("status mapping") {
  CHECK(http_status_for(ErrorCode::InvalidInput) == 400);
  CHECK(http_status_for(ErrorCode::AntimeridianCrossing) == 400);
  CHECK(http_status_for(ErrorCode::NoSceneAvailable) == 404);
  CHECK(http_status_for(ErrorCode::NotFound) == 404);
  CHECK(http_status_for(ErrorCode::NoLocationFound) == 422);
  CHECK(http_status_for(ErrorCode::ServiceError) == 502);
  CHECK(http_status_for(ErrorCode::BackendUnavailable) == 502);
  CHECK(http_status_for(ErrorCode::WeightMismatch) == 500);
}

TEST_CASE("download_image handler") {
  Fixture fx;
  const auto svc = FloodService::from_config(fx.cfg);
  const auto ok = svc->download_image(std::nullopt, std::nullopt);
  REQUIRE(ok.status == 200);
  const auto body = json::parse(ok.body);
  CHECK(body.contains("image_url"));
  const auto img = read_png(fx.cfg.image_dir / name_from_url(body["image_url"]));
  CHECK(img.width() == 256);

  CHECK(svc->download_image("91", "0").status == 400);
  CHECK(svc->download_image("abc", "0").status == 400);
  CHECK(svc->download_image("13.08", std::nullopt).status == 400);
  CHECK(svc->download_image("0", "179.99").status == 400);
  CHECK(svc->download_image("-40", "-20").status == 404);
}

TEST_CASE("segment handler with zero weights follows the >= convention") {
  Fixture fx;
  const auto svc = zero_weight_service(fx.cfg);
  const auto high = svc->segment(std::nullopt, std::nullopt, "0.7");
  REQUIRE(high.status == 200);
  CHECK(json::parse(high.body)["flood_fraction"] == 0.0);
  const auto mid = svc->segment(std::nullopt, std::nullopt, "0.5");
  REQUIRE(mid.status == 200);
  CHECK(json::parse(mid.body)["flood_fraction"] == 1.0);
  CHECK(svc->segment(std::nullopt, std::nullopt, "1.5").status == 400);
  CHECK(svc->segment(std::nullopt, std::nullopt, "x").status == 400);
}

TEST_CASE("segment responses reference decodable files and match the offline pipeline") {
  Fixture fx;
  const auto svc = FloodService::from_config(fx.cfg);
  const auto res = svc->segment("13.0827", "80.2707", std::nullopt);
  REQUIRE(res.status == 200);
  const auto body = json::parse(res.body);
  const auto image = read_png(fx.cfg.image_dir / name_from_url(body["image_url"]));
  const auto highlighted = read_png(fx.cfg.image_dir / name_from_url(body["overlay_url"]));
  CHECK(image.width() == highlighted.width());

  const auto engine = make_engine(fx.cfg);
  const auto offline = analyze_location(GeoPoint::make(13.0827, 80.2707), fx.cfg.half_extent_deg, fx.cfg.scene_size,
                                        FixtureTileStore(fx.cfg.tile_store), *engine, 0.5);
  CHECK(body["flood_fraction"].get<double>() == offline.flood_fraction);
  CHECK(image == offline.image);
  CHECK(highlighted == offline.overlay);
  CHECK(offline.flood_fraction > 0.0);
  CHECK(offline.flood_fraction < 1.0);

  // Threshold nesting through the service.
  double prev = 2.0;
  for (const char* t : {"0.3", "0.5", "0.7", "0.9"}) {
    const double f = json::parse(svc->segment(std::nullopt, std::nullopt, t).body)["flood_fraction"];
    CHECK(f <= prev);
    prev = f;
  }
}

TEST_CASE("query handler") {
  Fixture fx;
  const auto svc = FloodService::from_config(fx.cfg);
  const auto ok = svc->query(R"({"text": "What is the Flood Situation in Chhheennai"})");
  REQUIRE(ok.status == 200);
  const auto body = json::parse(ok.body);
  CHECK(body["location_name"] == "Chennai");
  CHECK(body["lat"].get<double>() == doctest::Approx(13.0827));
  for (const char* key : {"image_url", "overlay_url", "flood_fraction", "message", "lon"}) CHECK(body.contains(key));
  CHECK(body["message"].get<std::string>().find("Chennai") != std::string::npos);

  CHECK(svc->query(R"({"text": "Flood risk near Atlantis"})").status == 404);
  CHECK(svc->query(R"({"text": "hello there"})").status == 422);
  CHECK(svc->query("{}").status == 400);
  CHECK(svc->query("not json").status == 400);
  CHECK(svc->query(R"({"text": ""})").status == 400);
  CHECK(svc->query(R"({"text": "Is Tokyo flooded"})").status == 404);  // no tiles there
  const auto err = json::parse(svc->query("{}").body);
  CHECK(err.contains("error"));
}

TEST_CASE("image handler guards names") {
  Fixture fx;
  const auto svc = FloodService::from_config(fx.cfg);
  const auto url = json::parse(svc->download_image(std::nullopt, std::nullopt).body)["image_url"].get<std::string>();
  const auto name = name_from_url(url);
  const auto ok = svc->image(name);
  REQUIRE(ok.status == 200);
  CHECK(ok.content_type == "image/png");
  std::ifstream in(fx.cfg.image_dir / name, std::ios::binary);
  CHECK(ok.body == std::string(std::istreambuf_iterator<char>(in), {}));
  CHECK(svc->image("../etc/passwd").status == 400);
  CHECK(svc->image("..").status == 400);
  CHECK(svc->image("a\\b.png").status == 400);
  CHECK(svc->image("sat_1_abcdef.png").status == 404);
  CHECK(svc->image("other.png").status == 404);
}

TEST_CASE("HTTP routes, CORS and concurrent requests") {
  Fixture fx;
  auto cfg = fx.cfg;
  // Declared before the server so in-flight handlers never outlive it.
  std::shared_ptr<const FloodService> svc;
  testing_support::LocalServer server;
  // The base URL must point back at this server: bind, build the service, then listen.
  server.bind();
  cfg.base_url = server.url() + "/images";
  svc = FloodService::from_config(cfg);
  svc->register_routes(server.server());
  server.listen();

  httplib::Client cli(server.url());
  auto res = cli.Post("/query", R"({"text": "What is the Flood Situation in Chhheennai"})", "application/json");
  REQUIRE(res);
  REQUIRE(res->status == 200);
  CHECK(res->get_header_value("Access-Control-Allow-Origin") == "*");
  const auto body = json::parse(res->body);
  for (const char* key : {"image_url", "overlay_url"}) {
    const std::string url = body[key];
    REQUIRE(url.rfind(server.url(), 0) == 0);
    auto png = cli.Get(url.substr(server.url().size()));
    REQUIRE(png);
    CHECK(png->status == 200);
    CHECK(png->get_header_value("Content-Type") == "image/png");
    CHECK(decode_png({reinterpret_cast<const std::uint8_t*>(png->body.data()), png->body.size()}).width() == 256);
  }

  auto bad = cli.Get("/download_image?lat=91&lon=0");
  REQUIRE(bad);
  CHECK(bad->status == 400);
  auto traversal = cli.Get("/images/..%2F..%2Fetc%2Fpasswd");
  REQUIRE(traversal);
  CHECK(traversal->status == 400);
  auto options = cli.Options("/query");
  REQUIRE(options);
  CHECK(options->status == 204);
  CHECK(options->get_header_value("Access-Control-Allow-Methods").find("POST") != std::string::npos);

  std::vector<std::thread> threads;
  std::vector<double> fractions(6);
  for (int i = 0; i < 6; ++i) {
    threads.emplace_back([&, i] {
      httplib::Client c(server.url());
      c.set_read_timeout(60, 0);
      auto r = c.Get("/segment?threshold=0.5");
      if (r && r->status == 200) fractions[i] = json::parse(r->body)["flood_fraction"];
      else fractions[i] = -1.0;
    });
  }
  for (auto& t : threads) t.join();
  for (double f : fractions) CHECK(f == fractions[0]);
  CHECK(fractions[0] >= 0.0);
}
