// Copyright 2026 The FloodLense Authors
// SPDX-License-Identifier: Apache-2.0

#include "floodlense/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "floodlense/error.hpp"
#include "floodlense/png_io.hpp"

namespace floodlense {

namespace fs = std::filesystem;

namespace {

MetricValue ratio(double num, double den) {
  if (den == 0.0) return std::nullopt;
  return num / den;
}

void check_same_shape(const BinaryMask& a, const BinaryMask& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error(ErrorCode::ShapeMismatch,
                fmt::format("mask {}x{} vs {}x{}", a.width(), a.height(), b.width(), b.height()));
  }
}

std::map<std::string, fs::path> pngs_by_stem(const fs::path& dir) {
  std::map<std::string, fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") {
      out.emplace(entry.path().stem().string(), entry.path());
    }
  }
  return out;
}

}  // namespace

ConfusionCounts confusion(const BinaryMask& pred, const BinaryMask& gt) {
  check_same_shape(pred, gt);
  ConfusionCounts c;
  const auto p = pred.bits();
  const auto g = gt.bits();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i]) {
      g[i] ? ++c.tp : ++c.fp;
    } else {
      g[i] ? ++c.fn : ++c.tn;
    }
  }
  return c;
}

MetricsReport metrics(const ConfusionCounts& c) {
  const auto tp = static_cast<double>(c.tp);
  const auto fp = static_cast<double>(c.fp);
  const auto fn = static_cast<double>(c.fn);
  const auto tn = static_cast<double>(c.tn);
  MetricsReport r;
  r.iou = ratio(tp, tp + fp + fn);
  r.dice = ratio(2.0 * tp, 2.0 * tp + fp + fn);
  r.precision = ratio(tp, tp + fp);
  r.recall = ratio(tp, tp + fn);
  if (r.precision && r.recall) r.f1 = ratio(2.0 * *r.precision * *r.recall, *r.precision + *r.recall);
  r.accuracy = ratio(tp + tn, tp + fp + fn + tn);
  return r;
}

SweepReport threshold_sweep(const std::vector<ProbabilityMap>& maps, const std::vector<BinaryMask>& gts,
                            const std::vector<double>& thresholds) {
  if (maps.size() != gts.size()) {
    throw Error(ErrorCode::ShapeMismatch,
                fmt::format("{} maps but {} ground-truth masks", maps.size(), gts.size()));
  }
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    if (!(thresholds[i - 1] < thresholds[i])) {
      throw Error(ErrorCode::InvalidInput, "thresholds must be strictly increasing");
    }
  }
  SweepReport sweep;
  for (double t : thresholds) {
    SweepPoint point;
    point.threshold = t;
    for (std::size_t i = 0; i < maps.size(); ++i) {
      point.counts += confusion(binarize(maps[i], t), gts[i]);
    }
    point.report = metrics(point.counts);
    sweep.points.push_back(point);
  }
  return sweep;
}

Clock steady_clock_source() {
  return [] {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(
        std::chrono::steady_clock::now().time_since_epoch());
  };
}

TimingReport time_inference(const SegmentationEngine& engine, const std::vector<ImageRaster>& inputs,
                            int warmups, int runs, const Clock& clock) {
  if (runs < 1) throw Error(ErrorCode::InvalidInput, "runs must be at least 1");
  if (inputs.empty()) throw Error(ErrorCode::InvalidInput, "no inputs to time");
  for (int i = 0; i < warmups; ++i) (void)engine.predict(inputs[i % inputs.size()]);

  std::vector<double> ms;
  ms.reserve(runs);
  for (int i = 0; i < runs; ++i) {
    const auto start = clock();
    (void)engine.predict(inputs[i % inputs.size()]);
    const auto stop = clock();
    ms.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
  }
  TimingReport r;
  r.n = runs;
  double sum = 0.0;
  for (double v : ms) sum += v;
  r.mean_ms = sum / runs;
  if (runs > 1) {
    double sq = 0.0;
    for (double v : ms) sq += (v - r.mean_ms) * (v - r.mean_ms);
    r.std_ms = std::sqrt(sq / (runs - 1));
  }
  r.environment = fmt::format("threads={} compiler={}", std::thread::hardware_concurrency(), __VERSION__);
  return r;
}

DatasetSpec DatasetSpec::under(const fs::path& root, int resize) {
  return DatasetSpec{root / "images", root / "masks", resize};
}

std::vector<Sample> load_dataset(const DatasetSpec& spec) {
  if (spec.resize < 1) throw Error(ErrorCode::InvalidInput, "resize must be positive");
  std::error_code ec;
  if (!fs::is_directory(spec.image_dir, ec) || !fs::is_directory(spec.mask_dir, ec)) {
    throw Error(ErrorCode::IoError, fmt::format("dataset directories {} / {} do not exist",
                                                spec.image_dir.string(), spec.mask_dir.string()));
  }
  const auto images = pngs_by_stem(spec.image_dir);
  const auto masks = pngs_by_stem(spec.mask_dir);
  std::vector<Sample> out;
  for (const auto& [stem, image_path] : images) {
    const auto m = masks.find(stem);
    if (m == masks.end()) throw Error(ErrorCode::MissingMask, fmt::format("no mask for '{}'", stem));
    Sample s;
    s.stem = stem;
    s.image = normalize(nearest_resize(read_png(image_path), spec.resize, spec.resize));
    const auto raw = nearest_resize(read_png(m->second), spec.resize, spec.resize);
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(raw.width()) * raw.height());
    for (std::size_t p = 0; p < bits.size(); ++p) {
      for (int c = 0; c < raw.channels(); ++c) {
        if (raw.u8()[p * raw.channels() + c] > 0) bits[p] = 1;
      }
    }
    s.mask = BinaryMask(raw.width(), raw.height(), std::move(bits));
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<ProbabilityMap> predict_all(const SegmentationEngine& engine, const std::vector<Sample>& samples,
                                        unsigned workers) {
  std::vector<ProbabilityMap> maps(samples.size());
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(1, samples.size())));
  if (workers <= 1) {
    for (std::size_t i = 0; i < samples.size(); ++i) maps[i] = engine.predict(samples[i].image);
    return maps;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < samples.size(); i = next++) {
          try {
            maps[i] = engine.predict(samples[i].image);
          } catch (...) {
            std::lock_guard lock(failure_mu);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
  return maps;
}

MetricsReport evaluate(const SegmentationEngine& engine, const std::vector<Sample>& samples, double threshold) {
  const auto maps = predict_all(engine, samples);
  ConfusionCounts total;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    total += confusion(binarize(maps[i], threshold), samples[i].mask);
  }
  return metrics(total);
}

std::vector<AblationRow> run_ablation(const SegmentationEngine& engine, const std::vector<std::string>& layers,
                                      const std::vector<Sample>& samples, double threshold) {
  std::vector<AblationRow> rows;
  for (const auto& layer : layers) {
    const auto ablated = ablate(engine, layer);
    rows.push_back(AblationRow{layer, evaluate(*ablated, samples, threshold)});
  }
  return rows;
}

}  // namespace floodlense
