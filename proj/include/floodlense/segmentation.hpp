// Copyright 2026 The FloodLense Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "floodlense/raster_geo.hpp"
#include "floodlense/tensor.hpp"
#include "floodlense/weights.hpp"

namespace floodlense {

struct UNetConfig {
  int levels = 4;
  int base_channels = 16;
  int in_channels = 3;
  int out_channels = 1;

  void validate() const;
  friend bool operator==(const UNetConfig&, const UNetConfig&) = default;
};

enum class Activation { None, Relu, Sigmoid };

/// One convolution in forward order. Weights live in the archive as
/// "<name>.weight" [k, k, in, out] and "<name>.bias" [out].
struct LayerSpec {
  std::string name;
  int kernel = 3;
  int in_channels = 0;
  int out_channels = 0;
  Activation activation = Activation::Relu;
};

/// Encoder level i (channels base*2^i): enc{i}_conv1, enc{i}_conv2, then a
/// 2x2 max-pool except at the deepest level. Decoder level i, deepest first:
/// 2x nearest upsample, dec{i}_up (no activation), concatenate the enc{i}
/// skip, dec{i}_conv1, dec{i}_conv2. Finally a 1x1 "head" and a logistic.
std::vector<LayerSpec> unet_layers(const UNetConfig& cfg);

/// Recovers levels/base/in/out from the archive's layer shapes.
UNetConfig infer_unet_config(const WeightArchive& weights);

WeightArchive make_zero_unet_weights(const UNetConfig& cfg);
/// He-normal kernels, small random biases.
WeightArchive make_random_unet_weights(const UNetConfig& cfg, std::uint64_t seed);

using LayerObserver = std::function<void(std::string_view layer, const Tensor& output)>;

/// Runs the network described by cfg. Throws WeightMismatch when the archive
/// does not match cfg and BadDimensions when the image size is not a multiple
/// of 2^(levels-1) or its channel count differs from cfg.in_channels.
ProbabilityMap unet_forward(const UNetConfig& cfg, const WeightArchive& weights, const ImageRaster& img);

/// (a - b) / (a + b) mapped from [-1, 1] to [0, 1]; a + b == 0 gives 0.5.
ProbabilityMap water_index(const ImageRaster& img, int band_a, int band_b);

/// Split t in [1, 255] separating bins < t from bins >= t that maximizes
/// w0 * w1 * (mu0 - mu1)^2; smallest t on ties.
int otsu_threshold(std::span<const std::uint64_t, 256> hist);

/// Between-class variance of the split at t, as maximized by otsu_threshold.
double between_class_variance(std::span<const std::uint64_t, 256> hist, int t);

/// true iff p >= threshold.
BinaryMask binarize(const ProbabilityMap& pm, double threshold);

struct Rgb {
  std::uint8_t r = 255;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
};

/// Masked pixels become round((1 - alpha) * pixel + alpha * color).
ImageRaster overlay(const ImageRaster& img, const BinaryMask& mask, Rgb color = {}, double alpha = 0.5);

enum class EngineKind { UNet, Classical };

class SegmentationEngine {
 public:
  virtual ~SegmentationEngine() = default;

  virtual const std::string& name() const = 0;
  virtual EngineKind kind() const = 0;
  /// Output has the input's width and height, values in [0,1].
  virtual ProbabilityMap predict(const ImageRaster& img) const = 0;
  virtual std::vector<std::string> layer_names() const = 0;
  /// New engine with the named layer's parameters zeroed; this one is untouched.
  virtual std::shared_ptr<const SegmentationEngine> ablate(std::string_view layer) const = 0;
};

class UNetEngine final : public SegmentationEngine {
 public:
  UNetEngine(std::string name, UNetConfig cfg, WeightArchive weights);
  /// Config inferred from the archive.
  static std::shared_ptr<const UNetEngine> from_archive(std::string name, WeightArchive weights);

  const std::string& name() const override { return name_; }
  EngineKind kind() const override { return EngineKind::UNet; }
  ProbabilityMap predict(const ImageRaster& img) const override;
  std::vector<std::string> layer_names() const override;
  std::shared_ptr<const SegmentationEngine> ablate(std::string_view layer) const override;

  /// predict, reporting every layer output (post-activation) in forward order.
  ProbabilityMap forward(const ImageRaster& img, const LayerObserver& observer) const;

  const UNetConfig& config() const { return cfg_; }
  const WeightArchive& weights() const { return weights_; }

 private:
  struct Layer {
    LayerSpec spec;
    ConvKernel kernel;
    std::vector<float> bias;
  };

  Tensor run(const Layer& layer, const Tensor& input, const LayerObserver& observer) const;

  std::string name_;
  UNetConfig cfg_;
  WeightArchive weights_;
  std::vector<Layer> layers_;
};

/// Water index over (band_a, band_b) then Otsu on its 256-level histogram.
/// The map is rescaled piecewise-linearly so the Otsu cut lands on 0.5:
/// binarize(predict(img), 0.5) is exactly the Otsu segmentation.
class ClassicalEngine final : public SegmentationEngine {
 public:
  // True-color imagery has no SWIR band; green vs red is the default pair.
  explicit ClassicalEngine(std::string name = "classical", int band_a = 1, int band_b = 0);

  const std::string& name() const override { return name_; }
  EngineKind kind() const override { return EngineKind::Classical; }
  ProbabilityMap predict(const ImageRaster& img) const override;
  std::vector<std::string> layer_names() const override { return {}; }
  std::shared_ptr<const SegmentationEngine> ablate(std::string_view layer) const override;

 private:
  std::string name_;
  int band_a_;
  int band_b_;
};

std::shared_ptr<const SegmentationEngine> ablate(const SegmentationEngine& engine, std::string_view layer);

struct LayerActivation {
  std::string name;
  std::array<int, 3> shape{};  // H, W, C
  double mean = 0.0;
  double near_zero_fraction = 0.0;
};

struct ActivationStats {
  static constexpr double kNearZero = 1e-6;
  std::vector<LayerActivation> layers;
};

/// Throws InvalidInput for engines that are not UNets.
ActivationStats activation_stats(const SegmentationEngine& engine, const ImageRaster& img);

}  // namespace floodlense
