// Copyright 2026 The FloodLense Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "floodlense/raster_geo.hpp"
#include "floodlense/segmentation.hpp"

namespace floodlense {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const { return tp + fp + fn + tn; }
  std::uint64_t predicted_positive() const { return tp + fp; }

  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  friend ConfusionCounts operator+(ConfusionCounts a, const ConfusionCounts& b) { return a += b; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// nullopt is "undefined": the metric's denominator was zero.
using MetricValue = std::optional<double>;

struct MetricsReport {
  MetricValue iou;
  MetricValue dice;
  MetricValue precision;
  MetricValue recall;
  MetricValue f1;
  MetricValue accuracy;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

ConfusionCounts confusion(const BinaryMask& pred, const BinaryMask& gt);
MetricsReport metrics(const ConfusionCounts& c);

struct SweepPoint {
  double threshold = 0.0;
  ConfusionCounts counts;
  MetricsReport report;
};

struct SweepReport {
  std::vector<SweepPoint> points;  // strictly increasing thresholds
};

inline const std::vector<double>& default_thresholds() {
  static const std::vector<double> t = {0.3, 0.4, 0.5, 0.6, 0.7};
  return t;
}

/// Confusion counts are summed over every (map, gt) pair before computing
/// metrics (micro-aggregation).
SweepReport threshold_sweep(const std::vector<ProbabilityMap>& maps, const std::vector<BinaryMask>& gts,
                            const std::vector<double>& thresholds = default_thresholds());

struct TimingReport {
  double mean_ms = 0.0;
  double std_ms = 0.0;  // sample standard deviation, 0 for a single run
  int n = 0;
  std::string environment;
};

/// Monotonic time source, injectable for tests.
using Clock = std::function<std::chrono::nanoseconds()>;
Clock steady_clock_source();

/// Times engine.predict over inputs (cycled), excluding warmups.
TimingReport time_inference(const SegmentationEngine& engine, const std::vector<ImageRaster>& inputs,
                            int warmups, int runs, const Clock& clock = steady_clock_source());

struct Sample {
  std::string stem;
  ImageRaster image;  // normalized
  BinaryMask mask;
};

struct DatasetSpec {
  std::filesystem::path image_dir;
  std::filesystem::path mask_dir;
  int resize = 128;

  /// <root>/images and <root>/masks.
  static DatasetSpec under(const std::filesystem::path& root, int resize = 128);
};

/// Samples sorted by stem. Images are nearest-resized then normalized; a mask
/// pixel is positive iff any stored channel value is > 0.
std::vector<Sample> load_dataset(const DatasetSpec& spec);

/// Predicts every sample, spreading work over up to `workers` threads
/// (0 = hardware concurrency). Output order matches the input.
std::vector<ProbabilityMap> predict_all(const SegmentationEngine& engine, const std::vector<Sample>& samples,
                                        unsigned workers = 0);

MetricsReport evaluate(const SegmentationEngine& engine, const std::vector<Sample>& samples,
                       double threshold = 0.5);

struct AblationRow {
  std::string layer;
  MetricsReport report;
};

/// For each layer: ablate, evaluate over the samples at `threshold`.
std::vector<AblationRow> run_ablation(const SegmentationEngine& engine, const std::vector<std::string>& layers,
                                      const std::vector<Sample>& samples, double threshold = 0.5);

}  // namespace floodlense
