// Copyright 2026 The FloodLense Authors
// SPDX-License-Identifier: Apache-2.0

#include "floodlense/imagery.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <random>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "floodlense/error.hpp"
#include "floodlense/png_io.hpp"

namespace floodlense {

namespace fs = std::filesystem;
using namespace std::chrono;

std::string format_iso8601(UtcTime t) {
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss hms{t - day};
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}Z", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                     hms.hours().count(), hms.minutes().count(), hms.seconds().count());
}

UtcTime parse_iso8601(std::string_view text) {
  int y = 0;
  unsigned mo = 0, d = 0, h = 0, mi = 0, s = 0;
  const std::string buf(text);
  int consumed = 0;
  bool ok = false;
  if (std::sscanf(buf.c_str(), "%4d-%2u-%2uT%2u:%2u:%2uZ%n", &y, &mo, &d, &h, &mi, &s, &consumed) ==
          6 &&
      consumed == static_cast<int>(buf.size())) {
    ok = true;
  } else if (std::sscanf(buf.c_str(), "%4d-%2u-%2u%n", &y, &mo, &d, &consumed) == 3 &&
             consumed == static_cast<int>(buf.size())) {
    h = mi = s = 0;
    ok = true;
  }
  const year_month_day ymd{year{y}, month{mo}, day{d}};
  if (!ok || !ymd.ok() || h > 23 || mi > 59 || s > 59) {
    throw Error(ErrorCode::InvalidInput, fmt::format("bad ISO-8601 timestamp '{}'", buf));
  }
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
}

SceneMeta SceneMeta::make(UtcTime acquired_at, std::string source_id) {
  if (acquired_at > floor<seconds>(system_clock::now())) {
    throw Error(ErrorCode::InvalidInput,
                fmt::format("scene timestamp {} is in the future", format_iso8601(acquired_at)));
  }
  return SceneMeta{acquired_at, std::move(source_id)};
}

std::string cell_id_for(const GeoPoint& p) {
  // Round before flooring so 13.1 lands in cell 131 despite binary representation.
  const auto lat_idx = static_cast<long>(std::floor(std::round(p.lat * 1e6) / 1e5));
  const auto lon_idx = static_cast<long>(std::floor(std::round(p.lon * 1e6) / 1e5));
  return fmt::format("c{}_{}", lat_idx, lon_idx);
}

FixtureTileStore::FixtureTileStore(fs::path root) : root_(std::move(root)) {}

fs::path FixtureTileStore::scene_path(const fs::path& root, const std::string& cell_id,
                                      UtcTime acquired_at) {
  return root / cell_id / (format_iso8601(acquired_at) + ".png");
}

std::vector<SceneMeta> FixtureTileStore::scenes(const BoundingBox& bbox) const {
  const auto cell = cell_id_for(bbox.center());
  const auto dir = root_ / cell;
  std::vector<SceneMeta> out;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return out;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".png") continue;
    try {
      out.push_back(SceneMeta::make(parse_iso8601(entry.path().stem().string()),
                                    cell + "/" + entry.path().filename().string()));
    } catch (const Error& e) {
      spdlog::warn("skipping fixture scene {}: {}", entry.path().string(), e.what());
    }
  }
  if (ec) throw Error(ErrorCode::ServiceError, fmt::format("cannot list {}: {}", dir.string(), ec.message()));
  return out;
}

ImageRaster FixtureTileStore::load(const BoundingBox& bbox, const SceneMeta& scene) const {
  const auto path = scene_path(root_, cell_id_for(bbox.center()), scene.acquired_at);
  try {
    return read_png(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::ServiceError, e.what());
  }
}

std::pair<ImageRaster, SceneMeta> fetch_latest(const BoundingBox& bbox, const TileBackend& backend) {
  auto scenes = backend.scenes(bbox);
  if (scenes.empty()) {
    throw Error(ErrorCode::NoSceneAvailable,
                fmt::format("no scene covers [{}, {}, {}, {}]", bbox.min_lon, bbox.min_lat,
                            bbox.max_lon, bbox.max_lat));
  }
  // Equal timestamps resolve to the lexicographically largest source id.
  const auto latest = std::max_element(scenes.begin(), scenes.end(), [](const auto& a, const auto& b) {
    if (a.acquired_at != b.acquired_at) return a.acquired_at < b.acquired_at;
    return a.source_id < b.source_id;
  });
  return {backend.load(bbox, *latest), *latest};
}

ImageRaster process_scene(const ImageRaster& raw_in, int target) {
  if (raw_in.channels() < 3) {
    throw Error(ErrorCode::BadChannel,
                fmt::format("scene needs at least 3 channels, got {}", raw_in.channels()));
  }
  if (target < 1) throw Error(ErrorCode::BadDimensions, "target size must be positive");
  const ImageRaster raw = to_u8(raw_in);
  const int side = std::min(raw.width(), raw.height());
  const int x0 = (raw.width() - side) / 2;
  const int y0 = (raw.height() - side) / 2;

  std::vector<std::uint8_t> square(static_cast<std::size_t>(side) * side * 3);
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      for (int c = 0; c < 3; ++c) {
        square[(static_cast<std::size_t>(y) * side + x) * 3 + c] = raw.u8_at(x0 + x, y0 + y, c);
      }
    }
  }
  return nearest_resize(ImageRaster::from_u8(side, side, 3, std::move(square)), target, target);
}

ImageStoreRecord persist(const ImageRaster& img, const fs::path& store_dir, std::string_view base_url) {
  std::error_code ec;
  fs::create_directories(store_dir, ec);
  if (ec) {
    throw Error(ErrorCode::IoError, fmt::format("cannot create {}: {}", store_dir.string(), ec.message()));
  }
  const auto bytes = encode_png(img);

  thread_local std::mt19937 rng{std::random_device{}()};
  std::uniform_int_distribution<std::uint32_t> suffix(0, 0xFFFFFF);

  for (int attempt = 0; attempt < 16; ++attempt) {
    const auto now = floor<seconds>(system_clock::now());
    const auto name = fmt::format("sat_{}_{:06x}.png", now.time_since_epoch().count(), suffix(rng));
    const auto path = store_dir / name;
    // "x": fail instead of replacing an existing file.
    std::FILE* f = std::fopen(path.c_str(), "wbx");
    if (f == nullptr) {
      if (errno == EEXIST) continue;
      throw Error(ErrorCode::IoError, fmt::format("cannot create {}: {}", path.string(), std::strerror(errno)));
    }
    const bool ok = std::fwrite(bytes.data(), 1, bytes.size(), f) == bytes.size();
    if (std::fclose(f) != 0 || !ok) {
      throw Error(ErrorCode::IoError, fmt::format("short write to {}", path.string()));
    }
    std::string url(base_url);
    while (!url.empty() && url.back() == '/') url.pop_back();
    url += "/" + name;
    spdlog::info("stored {}x{} image at {}", img.width(), img.height(), path.string());
    return ImageStoreRecord{path, std::move(url), now};
  }
  throw Error(ErrorCode::IoError, "could not find an unused image filename");
}

}  // namespace floodlense
