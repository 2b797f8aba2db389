// Copyright 2026 The FloodLense Authors
// SPDX-License-Identifier: Apache-2.0

#include "floodlense/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <json.hpp>

#include "floodlense/error.hpp"
#include "floodlense/imagery.hpp"
#include "floodlense/png_io.hpp"
#include "floodlense/weights.hpp"

namespace floodlense {

namespace fs = std::filesystem;

namespace {

struct Color {
  double r, g, b;
};

constexpr Color kLand{132, 112, 78};
constexpr Color kVegetation{62, 112, 52};
constexpr Color kWater{32, 92, 148};

struct Ellipse {
  double cx, cy, rx, ry;
  bool contains(double x, double y) const {
    const double dx = (x - cx) / rx;
    const double dy = (y - cy) / ry;
    return dx * dx + dy * dy <= 1.0;
  }
};

Ellipse random_ellipse(Rng& rng, int w, int h, double min_r, double max_r) {
  return Ellipse{rng.uniform(0, w), rng.uniform(0, h), rng.uniform(min_r, max_r) * w,
                 rng.uniform(min_r, max_r) * h};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, fmt::format("cannot write {}", path.string()));
  out << text;
}

struct TileScene {
  double lat, lon;
  const char* timestamp;
};

}  // namespace

std::pair<ImageRaster, BinaryMask> synthesize_scene(int width, int height, Rng& rng) {
  std::vector<Ellipse> vegetation;
  for (int i = 0, n = static_cast<int>(rng.integer(1, 3)); i < n; ++i) {
    vegetation.push_back(random_ellipse(rng, width, height, 0.08, 0.2));
  }
  std::vector<Ellipse> water;
  for (int i = 0, n = static_cast<int>(rng.integer(1, 3)); i < n; ++i) {
    water.push_back(random_ellipse(rng, width, height, 0.1, 0.25));
  }
  const bool river = rng.uniform() < 0.5;
  const double river_y = rng.uniform(0.3, 0.7) * height;
  const double river_amp = rng.uniform(0.05, 0.15) * height;
  const double river_freq = rng.uniform(1.0, 3.0) * 2.0 * 3.141592653589793 / width;
  const double river_half = rng.uniform(0.03, 0.06) * height;

  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(width) * height * 3);
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(width) * height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      bool is_water = std::any_of(water.begin(), water.end(), [&](const Ellipse& e) { return e.contains(x, y); });
      if (river && std::abs(y - (river_y + river_amp * std::sin(river_freq * x))) <= river_half) is_water = true;
      const bool is_veg =
          std::any_of(vegetation.begin(), vegetation.end(), [&](const Ellipse& e) { return e.contains(x, y); });
      const Color base = is_water ? kWater : (is_veg ? kVegetation : kLand);
      const std::size_t p = static_cast<std::size_t>(y) * width + x;
      const double shade = rng.uniform(-12.0, 12.0);
      const double channel[3] = {base.r, base.g, base.b};
      for (int c = 0; c < 3; ++c) {
        const double v = channel[c] + shade + rng.uniform(-6.0, 6.0);
        pixels[p * 3 + c] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
      bits[p] = is_water ? 1 : 0;
    }
  }
  return {ImageRaster::from_u8(width, height, 3, std::move(pixels)), BinaryMask(width, height, std::move(bits))};
}

WeightArchive make_demo_unet_weights(const UNetConfig& cfg) {
  WeightArchive zero = make_zero_unet_weights(cfg);
  WeightArchive out;
  const int base = cfg.base_channels;
  for (const auto& e : zero.entries()) {
    auto values = e.values;
    auto set = [&](int ky, int kx, int c, int f, float v) {
      const auto k = e.shape;
      values[((static_cast<std::size_t>(ky) * k[1] + kx) * k[2] + c) * k[3] + f] = v;
    };
    if (e.name == "enc0_conv1.weight") {
      set(1, 1, 2, 0, 1.0f);   // + blue
      set(1, 1, 0, 0, -1.0f);  // - red
    } else if (e.name == "enc0_conv2.weight" || e.name == "dec0_conv2.weight") {
      set(1, 1, 0, 0, 1.0f);
    } else if (e.name == "dec0_conv1.weight") {
      set(1, 1, base, 0, 1.0f);  // first skip channel follows the upsampled block
    } else if (e.name == "head.weight") {
      set(0, 0, 0, 0, 30.0f);
    } else if (e.name == "head.bias") {
      values[0] = -5.0f;
    }
    out.add(e.name, e.shape, std::move(values));
  }
  return out;
}

Gazetteer fixture_gazetteer() {
  auto p = [](double lat, double lon) { return GeoPoint::make(lat, lon); };
  return Gazetteer({
      {"Chennai", {"Madras"}, p(13.0827, 80.2707)},
      {"Mumbai", {"Bombay"}, p(19.0760, 72.8777)},
      {"Kolkata", {"Calcutta"}, p(22.5726, 88.3639)},
      {"Japan", {}, p(36.2048, 138.2529)},
      {"Tokyo", {}, p(35.6762, 139.6503)},
      {"Mount Everest", {"Everest"}, p(27.9881, 86.9250)},
      {"New York", {"New York City", "NYC"}, p(40.7128, -74.0060)},
      {"London", {}, p(51.5072, -0.1276)},
      {"Venice", {"Venezia"}, p(45.4408, 12.3155)},
      {"Jakarta", {}, p(-6.2088, 106.8456)},
      {"Dhaka", {"Dacca"}, p(23.8103, 90.4125)},
      {"Bangkok", {}, p(13.7563, 100.5018)},
      {"Houston", {}, p(29.7604, -95.3698)},
      {"New Orleans", {}, p(29.9511, -90.0715)},
      {"Ganges River", {"Ganges", "Ganga"}, p(25.3176, 83.0062)},
      {"Mississippi River", {"Mississippi"}, p(29.1500, -89.2500)},
      {"Brahmaputra River", {"Brahmaputra"}, p(26.1445, 91.7362)},
      {"Kerala", {}, p(10.8505, 76.2711)},
      {"Assam", {}, p(26.2006, 92.9376)},
      {"Three Gorges Dam", {}, p(30.8230, 111.0032)},
  });
}

std::vector<InterfaceCase> fixture_interface_cases() {
  return {
      {"What is the Flood Situation in Chhheennai", "Chennai"},
      {"Tsunami alerts for the coast of Japan", "Japan"},
      {"Flood risk near Atlantis", std::nullopt},
      {"Weather forecast for Mount Everest", "Mount Everest"},
      {"hello there", std::nullopt},
      {"Is Mumbai flooded today?", "Mumbai"},
      {"Show me the water levels in Bombay", "Mumbai"},
      {"Flooding along the Ganges", "Ganges River"},
      {"Any flood alerts for Kolkatta", "Kolkata"},
      {"Current flood status of New York", "New York"},
      {"How bad is the flooding in Jakarta right now", "Jakarta"},
      {"Is Venise under water", "Venice"},
      {"Rainfall update for Dhaka", "Dhaka"},
      {"Flood map of Springfield", "Springfield"},
      {"Compare Mumbai and Chennai flood levels", "Chennai"},
      {"Water levels in the Mississippi", "Mississippi River"},
      {"flooding in new orleans", "New Orleans"},
      {"Is there flooding in Bangkok or Tokyo", "Bangkok"},
      {"Monsoon flood situation in Kerela", "Kerala"},
      {"Flood news from Londn", "London"},
  };
}

FixturePaths make_fixtures(const fs::path& out, std::uint64_t seed) {
  FixturePaths paths;
  paths.root = out;
  paths.dataset = out / "dataset";
  paths.gazetteer = out / "gazetteer.jsonl";
  paths.tiles = out / "tiles";
  paths.zero_weights = out / "weights" / "zero.flwt";
  paths.random_weights = out / "weights" / "random.flwt";
  paths.demo_weights = out / "weights" / "demo.flwt";
  paths.interface_cases = out / "interface_cases.jsonl";
  paths.config = out / "config.json";
  paths.image_store = out / "image_store";

  std::error_code ec;
  for (const auto& dir : {paths.dataset / "images", paths.dataset / "masks", paths.tiles, out / "weights",
                          paths.image_store}) {
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, fmt::format("cannot create {}: {}", dir.string(), ec.message()));
  }

  Rng rng(seed);
  for (int i = 0; i < kFixtureSamples; ++i) {
    auto [img, mask] = synthesize_scene(kFixtureSampleSize, kFixtureSampleSize, rng);
    const auto stem = fmt::format("sample_{:03d}", i);
    write_png(img, paths.dataset / "images" / (stem + ".png"));
    write_png(mask_to_raster(mask), paths.dataset / "masks" / (stem + ".png"));
  }

  const TileScene scenes[] = {
      {13.0827, 80.2707, "2024-11-20T05:10:00Z"},
      {13.0827, 80.2707, "2024-12-01T05:10:00Z"},
      {13.0827, 80.2707, "2024-12-03T05:10:00Z"},
      {19.0760, 72.8777, "2024-07-15T05:30:00Z"},
      {36.2048, 138.2529, "2024-09-01T01:20:00Z"},
  };
  for (const auto& s : scenes) {
    Rng scene_rng(seed + static_cast<std::uint64_t>(parse_iso8601(s.timestamp).time_since_epoch().count()));
    auto [img, mask] = synthesize_scene(320, 256, scene_rng);
    const auto path = FixtureTileStore::scene_path(paths.tiles, cell_id_for(GeoPoint::make(s.lat, s.lon)),
                                                   parse_iso8601(s.timestamp));
    fs::create_directories(path.parent_path(), ec);
    write_png(img, path);
  }

  write_text(paths.gazetteer, fixture_gazetteer().to_jsonl());

  std::string cases;
  for (const auto& c : fixture_interface_cases()) {
    nlohmann::ordered_json j;
    j["query"] = c.query;
    j["expected"] = c.expected ? nlohmann::ordered_json(*c.expected) : nlohmann::ordered_json(nullptr);
    cases += j.dump() + "\n";
  }
  write_text(paths.interface_cases, cases);

  const UNetConfig cfg;
  save_weights(make_zero_unet_weights(cfg), paths.zero_weights);
  save_weights(make_random_unet_weights(cfg, seed), paths.random_weights);
  save_weights(make_demo_unet_weights(cfg), paths.demo_weights);

  nlohmann::ordered_json config;
  config["port"] = 8080;
  config["image_dir"] = "image_store";
  config["gazetteer_path"] = "gazetteer.jsonl";
  config["half_extent_deg"] = 0.05;
  config["default_point"] = {{"lat", 13.0827}, {"lon", 80.2707}};
  config["default_threshold"] = 0.5;
  config["backend_mode"] = "fixture";
  config["weight_path"] = "weights/demo.flwt";
  config["tile_store"] = "tiles";
  config["scene_size"] = 256;
  config["engine"] = "unet";
  write_text(paths.config, config.dump(2) + "\n");
  return paths;
}

}  // namespace floodlense
