// Copyright 2026 The FloodLense Authors
// SPDX-License-Identifier: Apache-2.0

#include "floodlense/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <iterator>
#include <mutex>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "floodlense/error.hpp"
#include "floodlense/evaluation.hpp"
#include "floodlense/fixtures.hpp"
#include "floodlense/imagery.hpp"
#include "floodlense/png_io.hpp"
#include "floodlense/report.hpp"
#include "floodlense/service.hpp"
#include "floodlense/weights.hpp"

namespace floodlense {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void route_logs_to_stderr() {
  static std::once_flag once;
  std::call_once(once, [] {
    auto logger = spdlog::stderr_color_mt("floodlense");
    spdlog::set_default_logger(logger);
  });
}

const CLI::Validator kOpenUnit(
    [](std::string& s) -> std::string {
      double v = 0.0;
      if (!CLI::detail::lexical_cast(s, v) || !(v > 0.0 && v < 1.0)) return "threshold must lie in (0, 1)";
      return {};
    },
    "(0,1)");

std::vector<double> parse_thresholds(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    if (!CLI::detail::lexical_cast(item, v) || !(v > 0.0 && v < 1.0)) {
      throw UsageError(fmt::format("bad threshold '{}': must lie in (0, 1)", item));
    }
    if (!out.empty() && v <= out.back()) throw UsageError("thresholds must be strictly increasing");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("no thresholds given");
  return out;
}

std::vector<std::string> split_csv(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct EngineFlags {
  std::string engine = "unet";
  std::string weights;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--engine", engine, "unet or classical")->check(CLI::IsMember({"unet", "classical"}));
    cmd->add_option("--weights", weights, "UNet weight archive")->check(CLI::ExistingFile);
  }
  void check() const {
    if (engine == "unet" && weights.empty()) throw UsageError("--engine unet requires --weights");
  }
  std::shared_ptr<const SegmentationEngine> build() const {
    if (engine == "classical") return std::make_shared<ClassicalEngine>();
    return UNetEngine::from_archive("unet", load_weights(weights));
  }
};

struct DatasetFlags {
  std::string dir;
  int resize = 128;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--dataset", dir, "dataset root with images/ and masks/")->required()->check(CLI::ExistingDirectory);
    cmd->add_option("--resize", resize, "square side samples are resized to")->check(CLI::Range(1, 4096));
  }
  std::vector<Sample> load() const { return load_dataset(DatasetSpec::under(dir, resize)); }
};

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::IoError, fmt::format("cannot write {}", path.string()));
  f << text;
}

void emit(std::ostream& out, const Table& table, const std::string& json_path) {
  out << render_table(table);
  if (!json_path.empty()) write_file(json_path, table_to_json(table));
}

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, fmt::format("cannot read {}", path.string()));
  return std::string(std::istreambuf_iterator<char>(f), {});
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  route_logs_to_stderr();

  CLI::App app{"Flood mapping from satellite imagery: fetch, segment, evaluate, serve."};
  app.name("floodlense");
  app.require_subcommand(1);
  app.fallthrough();
  bool quiet = false;
  app.add_flag("--quiet", quiet, "only log warnings and errors");

  // serve
  auto* serve = app.add_subcommand("serve", "run the HTTP service");
  std::string serve_config;
  serve->add_option("--config", serve_config, "service config JSON")->required()->check(CLI::ExistingFile);

  // fetch / segment share the location flags
  struct LocationFlags {
    std::string config;
    std::string tiles;
    std::optional<double> lat;
    std::optional<double> lon;
    double half_extent = 0.05;
    int size = 256;
  };
  auto add_location = [](CLI::App* cmd, LocationFlags& f) {
    cmd->add_option("--config", f.config, "take defaults from a service config")->check(CLI::ExistingFile);
    cmd->add_option("--tiles", f.tiles, "fixture tile store root")->check(CLI::ExistingDirectory);
    cmd->add_option("--lat", f.lat, "latitude")->check(CLI::Range(-90.0, 90.0));
    cmd->add_option("--lon", f.lon, "longitude")->check(CLI::Range(-180.0, 180.0));
    cmd->add_option("--half-extent", f.half_extent, "bbox half extent in degrees")->check(CLI::Range(1e-6, 10.0));
    cmd->add_option("--size", f.size, "processed scene side")->check(CLI::Range(1, 4096));
  };

  auto* fetch = app.add_subcommand("fetch", "fetch the latest scene around a point and write it as PNG");
  LocationFlags fetch_loc;
  std::string fetch_out;
  add_location(fetch, fetch_loc);
  fetch->add_option("--out", fetch_out, "output PNG")->required();

  auto* seg = app.add_subcommand("segment", "segment a scene and write the overlay PNG");
  LocationFlags seg_loc;
  EngineFlags seg_engine;
  std::string seg_image, seg_out, seg_mask_out, seg_json;
  std::optional<double> seg_threshold;
  add_location(seg, seg_loc);
  seg_engine.add_to(seg);
  seg->add_option("--image", seg_image, "segment this PNG instead of fetching")->check(CLI::ExistingFile);
  seg->add_option("--threshold", seg_threshold, "binarization threshold")->check(kOpenUnit);
  seg->add_option("--out", seg_out, "overlay PNG")->required();
  seg->add_option("--mask-out", seg_mask_out, "binary mask PNG");
  seg->add_option("--json", seg_json, "write the result as JSON");

  // evaluation commands
  auto* eval = app.add_subcommand("eval", "metrics table over a dataset");
  DatasetFlags eval_data;
  EngineFlags eval_engine;
  double eval_threshold = 0.5;
  std::string eval_json;
  eval_data.add_to(eval);
  eval_engine.add_to(eval);
  eval->add_option("--threshold", eval_threshold, "binarization threshold")->check(kOpenUnit);
  eval->add_option("--json", eval_json, "write the table as JSON");

  auto* sweep = app.add_subcommand("sweep", "metrics over a list of thresholds");
  DatasetFlags sweep_data;
  EngineFlags sweep_engine;
  std::string sweep_thresholds = "0.3,0.4,0.5,0.6,0.7";
  std::string sweep_json;
  sweep_data.add_to(sweep);
  sweep_engine.add_to(sweep);
  sweep->add_option("--thresholds", sweep_thresholds, "comma separated, strictly increasing");
  sweep->add_option("--json", sweep_json, "write the table as JSON");

  auto* abl = app.add_subcommand("ablate", "zero one layer at a time and re-evaluate");
  DatasetFlags abl_data;
  EngineFlags abl_engine;
  std::string abl_layers, abl_json;
  double abl_threshold = 0.5;
  abl_data.add_to(abl);
  abl_engine.add_to(abl);
  abl->add_option("--layers", abl_layers, "comma separated layer names (default: all)");
  abl->add_option("--threshold", abl_threshold, "binarization threshold")->check(kOpenUnit);
  abl->add_option("--json", abl_json, "write the table as JSON");

  auto* bench = app.add_subcommand("bench", "mean inference time per engine");
  DatasetFlags bench_data;
  std::string bench_engines = "unet", bench_weights, bench_json;
  int bench_runs = 20, bench_warmups = 3;
  bench_data.add_to(bench);
  bench->add_option("--engine", bench_engines, "comma separated: unet, classical");
  bench->add_option("--weights", bench_weights, "UNet weight archive")->check(CLI::ExistingFile);
  bench->add_option("--runs", bench_runs, "timed runs")->check(CLI::Range(1, 100000));
  bench->add_option("--warmups", bench_warmups, "untimed runs")->check(CLI::Range(0, 100000));
  bench->add_option("--json", bench_json, "write the table as JSON");

  auto* iface = app.add_subcommand("interface-eval", "extraction and geocoding rates over labelled queries");
  std::string iface_gazetteer, iface_cases, iface_json;
  iface->add_option("--gazetteer", iface_gazetteer, "gazetteer JSONL")->required()->check(CLI::ExistingFile);
  iface->add_option("--cases", iface_cases, "query cases JSONL")->required()->check(CLI::ExistingFile);
  iface->add_option("--json", iface_json, "write the table as JSON");

  auto* fixtures = app.add_subcommand("make-fixtures", "write the deterministic offline fixture set");
  std::string fixtures_out;
  std::uint64_t seed = kDefaultSeed;
  fixtures->add_option("--out", fixtures_out, "output directory")->required();
  fixtures->add_option("--seed", seed, "generator seed");

  auto* render = app.add_subcommand("render", "render a stored JSON report as a text table");
  std::string render_json, render_title, render_corner = "Metric";
  render->add_option("--json", render_json, "report JSON")->required()->check(CLI::ExistingFile);
  render->add_option("--title", render_title, "table title");
  render->add_option("--corner", render_corner, "header of the row-label column");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  spdlog::set_level(quiet ? spdlog::level::warn : spdlog::level::info);

  auto location_inputs = [](const LocationFlags& f) {
    struct Inputs {
      GeoPoint point;
      double half_extent;
      int size;
      std::shared_ptr<TileBackend> tiles;
      std::optional<ServiceConfig> config;
    };
    Inputs in{GeoPoint{}, f.half_extent, f.size, nullptr, std::nullopt};
    if (!f.config.empty()) {
      auto cfg = load_service_config(f.config);
      in.point = cfg.default_point;
      in.half_extent = cfg.half_extent_deg;
      in.size = cfg.scene_size;
      if (cfg.backend_mode == BackendMode::Fixture) in.tiles = std::make_shared<FixtureTileStore>(cfg.tile_store);
      in.config = std::move(cfg);
    }
    if (!f.tiles.empty()) in.tiles = std::make_shared<FixtureTileStore>(f.tiles);
    if (f.lat.has_value() != f.lon.has_value()) throw UsageError("--lat and --lon go together");
    if (f.lat) {
      in.point = GeoPoint::make(*f.lat, *f.lon);
    } else if (!in.config) {
      throw UsageError("give --lat/--lon or --config");
    }
    if (!in.tiles) throw UsageError("give --tiles or a fixture-mode --config");
    return in;
  };

  try {
    if (*serve) {
      FloodService::from_config(load_service_config(serve_config))->serve();
    } else if (*fetch) {
      const auto in = location_inputs(fetch_loc);
      auto [raw, scene] = fetch_latest(bbox_around(in.point, in.half_extent), *in.tiles);
      write_png(process_scene(raw, in.size), fetch_out);
      out << fmt::format("{} {}\n", format_iso8601(scene.acquired_at), fetch_out);
    } else if (*seg) {
      nlohmann::ordered_json result;
      double threshold = seg_threshold.value_or(0.5);
      ImageRaster image = ImageRaster::filled_u8(1, 1, 3, 0);
      BinaryMask mask = BinaryMask::filled(1, 1, false);
      ImageRaster highlighted = image;
      double fraction = 0.0;
      std::shared_ptr<const SegmentationEngine> engine;
      if (seg_image.empty()) {
        const auto in = location_inputs(seg_loc);
        if (in.config) {
          if (!seg_threshold) threshold = in.config->default_threshold;
          if (seg_engine.weights.empty() && seg_engine.engine == in.config->engine) engine = make_engine(*in.config);
        }
        if (!engine) {
          seg_engine.check();
          engine = seg_engine.build();
        }
        auto a = analyze_location(in.point, in.half_extent, in.size, *in.tiles, *engine, threshold);
        result["lat"] = in.point.lat;
        result["lon"] = in.point.lon;
        result["acquired_at"] = format_iso8601(a.scene.acquired_at);
        mask = std::move(a.mask);
        highlighted = std::move(a.overlay);
        fraction = a.flood_fraction;
      } else {
        seg_engine.check();
        engine = seg_engine.build();
        image = read_png(seg_image);
        mask = binarize(engine->predict(image), threshold);
        highlighted = overlay(image, mask);
        fraction = mask.positive_fraction();
      }
      write_png(highlighted, seg_out);
      if (!seg_mask_out.empty()) write_png(mask_to_raster(mask), seg_mask_out);
      result["engine"] = engine->name();
      result["threshold"] = threshold;
      result["flood_fraction"] = fraction;
      result["overlay"] = seg_out;
      out << result.dump() << "\n";
      if (!seg_json.empty()) write_file(seg_json, result.dump(2) + "\n");
    } else if (*eval) {
      eval_engine.check();
      const auto engine = eval_engine.build();
      const auto report = evaluate(*engine, eval_data.load(), eval_threshold);
      emit(out, metrics_table(fmt::format("Performance Metrics ({})", engine->name()), {{engine->name(), report}}),
           eval_json);
    } else if (*sweep) {
      sweep_engine.check();
      const auto thresholds = parse_thresholds(sweep_thresholds);
      const auto engine = sweep_engine.build();
      const auto samples = sweep_data.load();
      std::vector<BinaryMask> gts;
      for (const auto& s : samples) gts.push_back(s.mask);
      const auto report = threshold_sweep(predict_all(*engine, samples), gts, thresholds);
      emit(out, sweep_table(fmt::format("Threshold Sweep ({})", engine->name()), report), sweep_json);
    } else if (*abl) {
      abl_engine.check();
      const auto engine = abl_engine.build();
      auto layers = split_csv(abl_layers);
      if (layers.empty()) layers = engine->layer_names();
      if (layers.empty()) throw UsageError(fmt::format("engine '{}' has no ablatable layers", engine->name()));
      const auto rows = run_ablation(*engine, layers, abl_data.load(), abl_threshold);
      emit(out, ablation_table(fmt::format("Ablation Study ({})", engine->name()), rows), abl_json);
    } else if (*bench) {
      const auto names = split_csv(bench_engines);
      if (names.empty()) throw UsageError("no engines given");
      std::vector<std::shared_ptr<const SegmentationEngine>> engines;
      for (const auto& name : names) {
        EngineFlags f{name, bench_weights};
        if (name != "unet" && name != "classical") throw UsageError(fmt::format("unknown engine '{}'", name));
        f.check();
        engines.push_back(f.build());
      }
      std::vector<ImageRaster> inputs;
      for (auto& s : bench_data.load()) inputs.push_back(std::move(s.image));
      std::vector<std::pair<std::string, TimingReport>> timings;
      for (const auto& e : engines) {
        auto t = time_inference(*e, inputs, bench_warmups, bench_runs);
        spdlog::info("{}: {:.5f} ms mean, {:.5f} ms std over {} runs on {}", e->name(), t.mean_ms, t.std_ms, t.n,
                     t.environment);
        timings.emplace_back(e->name(), std::move(t));
      }
      emit(out, timing_table("Inference Time", timings), bench_json);
    } else if (*iface) {
      auto gazetteer = std::make_shared<const Gazetteer>(Gazetteer::load(iface_gazetteer));
      const auto report = evaluate_interface(load_interface_cases(iface_cases), GazetteerExtractor(gazetteer),
                                             GazetteerGeocoder(gazetteer));
      for (const auto& o : report.outcomes) {
        spdlog::info("'{}' -> {} {}", o.query, o.extracted.value_or("<none>"),
                     o.point ? fmt::format("({:.4f}, {:.4f})", o.point->lat, o.point->lon) : "<no point>");
      }
      emit(out, interface_table("Interface Evaluation", report), iface_json);
    } else if (*fixtures) {
      const auto paths = make_fixtures(fixtures_out, seed);
      out << fmt::format("wrote fixtures to {}\n", paths.root.string());
    } else if (*render) {
      out << render_table(table_from_json(read_file(render_json), render_title, render_corner));
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace floodlense
