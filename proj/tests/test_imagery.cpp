// Copyright 2026 The FloodLense Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <regex>
#include <set>
#include <thread>

#include "fake_server.hpp"
#include "floodlense/error.hpp"
#include "floodlense/imagery.hpp"
#include "floodlense/live_clients.hpp"
#include "floodlense/png_io.hpp"
#include "oracles.hpp"

using namespace floodlense;
using namespace std::chrono;

namespace {

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidInput;
}

ImageRaster gradient(int w, int h) {
  std::vector<std::uint8_t> px;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      px.push_back(static_cast<std::uint8_t>(x));
      px.push_back(static_cast<std::uint8_t>(y));
      px.push_back(static_cast<std::uint8_t>((x + y) % 256));
    }
  }
  return ImageRaster::from_u8(w, h, 3, std::move(px));
}

}  // namespace

TEST_CASE("ISO-8601 timestamps round-trip") {
  const auto t = parse_iso8601("2024-12-03T05:10:00Z");
  CHECK(format_iso8601(t) == "2024-12-03T05:10:00Z");
  CHECK(t.time_since_epoch().count() == 1733202600);
  CHECK(format_iso8601(parse_iso8601("2024-02-29")) == "2024-02-29T00:00:00Z");
  for (const char* bad : {"", "2024-13-01", "2023-02-29", "2024-12-03T25:00:00Z", "2024-12-03 05:10:00",
                          "2024-12-03T05:10:00Zjunk"}) {
    CHECK_MESSAGE(code_of([&] { parse_iso8601(bad); }) == ErrorCode::InvalidInput, bad);
  }
}

TEST_CASE("scene metadata rejects the future") {
  const auto tomorrow = floor<seconds>(system_clock::now()) + hours(24);
  CHECK(code_of([&] { SceneMeta::make(tomorrow, "x"); }) == ErrorCode::InvalidInput);
  CHECK_NOTHROW(SceneMeta::make(parse_iso8601("2020-01-01"), "x"));
}

TEST_CASE("cell ids follow a 0.1 degree grid") {
  CHECK(cell_id_for(GeoPoint::make(13.0827, 80.2707)) == "c130_802");
  CHECK(cell_id_for(GeoPoint::make(13.1, 80.0)) == "c131_800");
  CHECK(cell_id_for(GeoPoint::make(-6.2088, 106.8456)) == "c-63_1068");
  CHECK(cell_id_for(GeoPoint::make(0.0, -0.05)) == "c0_-1");
}

TEST_CASE("fixture tile store serves the newest scene for the bbox cell") {
  const auto root = oracle::temp_dir("tiles");
  const auto p = GeoPoint::make(13.0827, 80.2707);
  const auto cell = cell_id_for(p);
  for (const char* ts : {"2024-11-20T05:10:00Z", "2024-12-03T05:10:00Z", "2024-12-01T05:10:00Z"}) {
    const auto t = parse_iso8601(ts);
    const auto path = FixtureTileStore::scene_path(root, cell, t);
    std::filesystem::create_directories(path.parent_path());
    write_png(ImageRaster::filled_u8(6, 4, 3, static_cast<std::uint8_t>(t.time_since_epoch().count() % 251)), path);
  }
  // Junk files are skipped, not fatal.
  write_png(ImageRaster::filled_u8(2, 2, 3, 0), root / cell / "not-a-date.png");

  const FixtureTileStore store(root);
  const auto bbox = bbox_around(p, 0.05);
  CHECK(store.scenes(bbox).size() == 3);
  const auto [img, meta] = fetch_latest(bbox, store);
  CHECK(format_iso8601(meta.acquired_at) == "2024-12-03T05:10:00Z");
  CHECK(img.u8_at(0, 0, 0) == parse_iso8601("2024-12-03T05:10:00Z").time_since_epoch().count() % 251);

  CHECK(code_of([&] { fetch_latest(bbox_around(GeoPoint::make(-40.0, -20.0), 0.05), store); }) ==
        ErrorCode::NoSceneAvailable);
  std::filesystem::remove_all(root);
}

TEST_CASE("process_scene center-crops then resizes") {
  const auto raw = gradient(30, 20);
  const auto out = process_scene(raw, 10);
  CHECK(out.width() == 10);
  CHECK(out.height() == 10);
  CHECK(out.channels() == 3);
  for (int y = 0; y < 10; ++y) {
    for (int x = 0; x < 10; ++x) {
      REQUIRE(out.u8_at(x, y, 0) == 5 + x * 2);  // crop starts at column 5, 20 -> 10
      REQUIRE(out.u8_at(x, y, 1) == y * 2);
    }
  }
  CHECK(process_scene(normalize(raw), 20) == process_scene(raw, 20));
  CHECK(code_of([] { process_scene(ImageRaster::filled_u8(4, 4, 1, 0), 4); }) == ErrorCode::BadChannel);
}

TEST_CASE("persist writes unique names under concurrency") {
  const auto dir = oracle::temp_dir("store");
  const auto img = ImageRaster::filled_u8(4, 4, 3, 7);
  std::vector<std::vector<ImageStoreRecord>> per_thread(8);
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 10; ++i) per_thread[t].push_back(persist(img, dir, "http://host/images/"));
    });
  }
  for (auto& th : threads) th.join();
  std::set<std::string> names;
  const std::regex pattern(R"(^sat_[0-9]+_[0-9a-f]{6}\.png$)");
  for (const auto& records : per_thread) {
    for (const auto& r : records) {
      const auto name = r.file_path.filename().string();
      CHECK(std::regex_match(name, pattern));
      CHECK(r.url == "http://host/images/" + name);
      CHECK(read_png(r.file_path) == img);
      names.insert(name);
    }
  }
  CHECK(names.size() == 80);
  std::filesystem::remove_all(dir);
}

TEST_CASE("Sentinel client against a local fake") {
  testing_support::LocalServer fake;
  std::string wms_time, wfs_bbox;
  fake.server().Get("/sh/ogc/wfs/inst", [&](const httplib::Request& req, httplib::Response& res) {
    wfs_bbox = req.get_param_value("BBOX");
    REQUIRE(req.get_param_value("TYPENAMES") == "DSS2");
    res.set_content(R"({"type": "FeatureCollection", "features": [
      {"properties": {"date": "2024-12-01", "time": "05:10:11", "id": "a"}},
      {"properties": {"date": "2024-12-03", "time": "05:09:59", "id": "b"}}]})",
                    "application/json");
  });
  fake.server().Get("/sh/ogc/wms/inst", [&](const httplib::Request& req, httplib::Response& res) {
    wms_time = req.get_param_value("TIME");
    const auto bytes = encode_png(ImageRaster::filled_u8(8, 8, 3, 42));
    res.set_content(std::string(bytes.begin(), bytes.end()), "image/png");
  });
  fake.server().Get("/bad/ogc/wfs/inst", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("{\"features\": 3}", "application/json");
  });
  fake.start();

  SentinelHubConfig cfg;
  cfg.base_url = fake.url() + "/sh";
  cfg.instance_id = "inst";
  const SentinelHubTiles tiles(cfg);
  const auto bbox = bbox_around(GeoPoint::make(13.0827, 80.2707), 0.05);
  const auto [img, meta] = fetch_latest(bbox, tiles);
  CHECK(format_iso8601(meta.acquired_at) == "2024-12-03T05:09:59Z");
  CHECK(wms_time == "2024-12-03/2024-12-03");
  CHECK(wfs_bbox == "80.220700,13.032700,80.320700,13.132700");
  CHECK(img.u8_at(3, 3, 1) == 42);

  cfg.base_url = fake.url() + "/bad";
  CHECK(code_of([&] { SentinelHubTiles(cfg).scenes(bbox); }) == ErrorCode::ServiceError);
  cfg.base_url = fake.url() + "/missing";
  CHECK(code_of([&] { SentinelHubTiles(cfg).scenes(bbox); }) == ErrorCode::ServiceError);
}
