// Copyright 2026 The FloodLense Authors
// SPDX-License-Identifier: Apache-2.0

#include "floodlense/segmentation.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "floodlense/error.hpp"
#include "floodlense/rng.hpp"

namespace floodlense {

namespace {

std::string weight_name(const std::string& layer) { return layer + ".weight"; }
std::string bias_name(const std::string& layer) { return layer + ".bias"; }

Tensor to_tensor(const ImageRaster& img_in) {
  const ImageRaster img = img_in.is_normalized() ? img_in : normalize(img_in);
  const auto s = img.normalized();
  return Tensor(img.height(), img.width(), img.channels(), std::vector<float>(s.begin(), s.end()));
}

double split_variance(std::uint64_t n0, std::uint64_t s0, std::uint64_t n, std::uint64_t s) {
  const std::uint64_t n1 = n - n0;
  if (n0 == 0 || n1 == 0) return 0.0;
  const double w0 = static_cast<double>(n0) / static_cast<double>(n);
  const double w1 = static_cast<double>(n1) / static_cast<double>(n);
  const double mu0 = static_cast<double>(s0) / static_cast<double>(n0);
  const double mu1 = static_cast<double>(s - s0) / static_cast<double>(n1);
  const double d = mu0 - mu1;
  return w0 * w1 * d * d;
}

void check_histogram(std::span<const std::uint64_t, 256> hist) {
  for (auto c : hist) {
    if (c != 0) return;
  }
  throw Error(ErrorCode::EmptyHistogram, "histogram has no counts");
}

}  // namespace

void UNetConfig::validate() const {
  if (levels < 1 || base_channels < 1 || in_channels < 1 || out_channels < 1) {
    throw Error(ErrorCode::InvalidInput,
                fmt::format("invalid UNet config: levels={} base={} in={} out={}", levels,
                            base_channels, in_channels, out_channels));
  }
  if (out_channels != 1) {
    throw Error(ErrorCode::InvalidInput, "only single-channel (water) output is supported");
  }
  if (levels > 12) throw Error(ErrorCode::InvalidInput, "too many UNet levels");
}

std::vector<LayerSpec> unet_layers(const UNetConfig& cfg) {
  cfg.validate();
  auto width = [&](int level) { return cfg.base_channels << level; };
  std::vector<LayerSpec> layers;
  int in = cfg.in_channels;
  for (int i = 0; i < cfg.levels; ++i) {
    layers.push_back({fmt::format("enc{}_conv1", i), 3, in, width(i), Activation::Relu});
    layers.push_back({fmt::format("enc{}_conv2", i), 3, width(i), width(i), Activation::Relu});
    in = width(i);
  }
  for (int i = cfg.levels - 2; i >= 0; --i) {
    layers.push_back({fmt::format("dec{}_up", i), 3, width(i + 1), width(i), Activation::None});
    layers.push_back({fmt::format("dec{}_conv1", i), 3, 2 * width(i), width(i), Activation::Relu});
    layers.push_back({fmt::format("dec{}_conv2", i), 3, width(i), width(i), Activation::Relu});
  }
  layers.push_back({"head", 1, width(0), cfg.out_channels, Activation::Sigmoid});
  return layers;
}

UNetConfig infer_unet_config(const WeightArchive& weights) {
  const auto* first = weights.find("enc0_conv1.weight");
  const auto* head = weights.find("head.weight");
  if (first == nullptr || head == nullptr || first->shape.size() != 4 || head->shape.size() != 4) {
    throw Error(ErrorCode::WeightMismatch, "archive does not describe a UNet");
  }
  UNetConfig cfg;
  cfg.in_channels = static_cast<int>(first->shape[2]);
  cfg.base_channels = static_cast<int>(first->shape[3]);
  cfg.out_channels = static_cast<int>(head->shape[3]);
  cfg.levels = 0;
  while (weights.find(fmt::format("enc{}_conv1.weight", cfg.levels)) != nullptr) ++cfg.levels;
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::WeightMismatch, e.what());
  }
  return cfg;
}

WeightArchive make_zero_unet_weights(const UNetConfig& cfg) {
  WeightArchive archive;
  for (const auto& l : unet_layers(cfg)) {
    const auto k = static_cast<std::uint32_t>(l.kernel);
    const auto in = static_cast<std::uint32_t>(l.in_channels);
    const auto out = static_cast<std::uint32_t>(l.out_channels);
    archive.add(weight_name(l.name), {k, k, in, out}, std::vector<float>(std::size_t{k} * k * in * out, 0.0f));
    archive.add(bias_name(l.name), {out}, std::vector<float>(out, 0.0f));
  }
  return archive;
}

WeightArchive make_random_unet_weights(const UNetConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  WeightArchive archive;
  for (const auto& l : unet_layers(cfg)) {
    const auto k = static_cast<std::uint32_t>(l.kernel);
    const auto in = static_cast<std::uint32_t>(l.in_channels);
    const auto out = static_cast<std::uint32_t>(l.out_channels);
    const double stddev = std::sqrt(2.0 / (static_cast<double>(k) * k * in));
    std::vector<float> w(std::size_t{k} * k * in * out);
    for (auto& v : w) v = static_cast<float>(rng.normal() * stddev);
    std::vector<float> b(out);
    for (auto& v : b) v = static_cast<float>(rng.uniform(-0.05, 0.05));
    archive.add(weight_name(l.name), {k, k, in, out}, std::move(w));
    archive.add(bias_name(l.name), {out}, std::move(b));
  }
  return archive;
}

UNetEngine::UNetEngine(std::string name, UNetConfig cfg, WeightArchive weights)
    : name_(std::move(name)), cfg_(cfg), weights_(std::move(weights)) {
  try {
    cfg_.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::WeightMismatch, e.what());
  }
  const auto specs = unet_layers(cfg_);
  if (weights_.entries().size() != 2 * specs.size()) {
    throw Error(ErrorCode::WeightMismatch,
                fmt::format("archive has {} entries, config needs {}", weights_.entries().size(),
                            2 * specs.size()));
  }
  for (const auto& spec : specs) {
    const auto* w = weights_.find(weight_name(spec.name));
    const auto* b = weights_.find(bias_name(spec.name));
    const std::vector<std::uint32_t> wshape = {
        static_cast<std::uint32_t>(spec.kernel), static_cast<std::uint32_t>(spec.kernel),
        static_cast<std::uint32_t>(spec.in_channels), static_cast<std::uint32_t>(spec.out_channels)};
    const std::vector<std::uint32_t> bshape = {static_cast<std::uint32_t>(spec.out_channels)};
    if (w == nullptr || b == nullptr) {
      throw Error(ErrorCode::WeightMismatch, fmt::format("missing parameters for layer {}", spec.name));
    }
    if (w->shape != wshape || b->shape != bshape) {
      throw Error(ErrorCode::WeightMismatch, fmt::format("shape mismatch for layer {}", spec.name));
    }
    layers_.push_back(Layer{spec,
                            ConvKernel(spec.kernel, spec.kernel, spec.in_channels, spec.out_channels,
                                       w->values),
                            b->values});
  }
}

std::shared_ptr<const UNetEngine> UNetEngine::from_archive(std::string name, WeightArchive weights) {
  const auto cfg = infer_unet_config(weights);
  return std::make_shared<const UNetEngine>(std::move(name), cfg, std::move(weights));
}

Tensor UNetEngine::run(const Layer& layer, const Tensor& input, const LayerObserver& observer) const {
  Tensor out = conv2d(input, layer.kernel, layer.bias, 1, layer.spec.kernel / 2);
  switch (layer.spec.activation) {
    case Activation::Relu: relu_inplace(out); break;
    case Activation::Sigmoid: sigmoid_inplace(out); break;
    case Activation::None: break;
  }
  if (observer) observer(layer.spec.name, out);
  return out;
}

ProbabilityMap UNetEngine::forward(const ImageRaster& img, const LayerObserver& observer) const {
  const int factor = 1 << (cfg_.levels - 1);
  if (img.width() % factor != 0 || img.height() % factor != 0) {
    throw Error(ErrorCode::BadDimensions,
                fmt::format("{}x{} input is not divisible by {}", img.width(), img.height(), factor));
  }
  if (img.channels() != cfg_.in_channels) {
    throw Error(ErrorCode::BadDimensions,
                fmt::format("input has {} channels, network expects {}", img.channels(), cfg_.in_channels));
  }
  Tensor x = to_tensor(img);
  std::size_t li = 0;
  std::vector<Tensor> skips;
  for (int level = 0; level < cfg_.levels; ++level) {
    x = run(layers_[li++], x, observer);
    x = run(layers_[li++], x, observer);
    if (level + 1 < cfg_.levels) {
      skips.push_back(x);
      x = max_pool2(x);
    }
  }
  for (int level = cfg_.levels - 2; level >= 0; --level) {
    x = run(layers_[li++], upsample2_nearest(x), observer);
    x = concat_channels(x, skips[level]);
    x = run(layers_[li++], x, observer);
    x = run(layers_[li++], x, observer);
  }
  x = run(layers_[li++], x, observer);
  return ProbabilityMap(x.width, x.height, std::move(x.data));
}

ProbabilityMap UNetEngine::predict(const ImageRaster& img) const { return forward(img, nullptr); }

std::vector<std::string> UNetEngine::layer_names() const {
  std::vector<std::string> names;
  for (const auto& l : layers_) names.push_back(l.spec.name);
  return names;
}

std::shared_ptr<const SegmentationEngine> UNetEngine::ablate(std::string_view layer) const {
  WeightArchive copy = weights_;
  auto* w = copy.find_mutable(weight_name(std::string(layer)));
  auto* b = copy.find_mutable(bias_name(std::string(layer)));
  if (w == nullptr || b == nullptr) {
    throw Error(ErrorCode::UnknownLayer, fmt::format("no layer named '{}'", std::string(layer)));
  }
  std::fill(w->values.begin(), w->values.end(), 0.0f);
  std::fill(b->values.begin(), b->values.end(), 0.0f);
  return std::make_shared<const UNetEngine>(fmt::format("{}-ablated-{}", name_, layer), cfg_,
                                            std::move(copy));
}

ProbabilityMap unet_forward(const UNetConfig& cfg, const WeightArchive& weights, const ImageRaster& img) {
  return UNetEngine("unet", cfg, weights).predict(img);
}

ProbabilityMap water_index(const ImageRaster& img, int band_a, int band_b) {
  if (band_a < 0 || band_a >= img.channels() || band_b < 0 || band_b >= img.channels()) {
    throw Error(ErrorCode::BadChannel, fmt::format("bands ({}, {}) not in a {}-channel raster", band_a,
                                                   band_b, img.channels()));
  }
  std::vector<float> out(static_cast<std::size_t>(img.width()) * img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double a = img.value_at(x, y, band_a);
      const double b = img.value_at(x, y, band_b);
      const double sum = a + b;
      const double index = sum == 0.0 ? 0.0 : (a - b) / sum;
      out[static_cast<std::size_t>(y) * img.width() + x] =
          static_cast<float>(std::clamp((index + 1.0) / 2.0, 0.0, 1.0));
    }
  }
  return ProbabilityMap(img.width(), img.height(), std::move(out));
}

double between_class_variance(std::span<const std::uint64_t, 256> hist, int t) {
  std::uint64_t n = 0, s = 0, n0 = 0, s0 = 0;
  for (int b = 0; b < 256; ++b) {
    n += hist[b];
    s += hist[b] * static_cast<std::uint64_t>(b);
    if (b < t) {
      n0 += hist[b];
      s0 += hist[b] * static_cast<std::uint64_t>(b);
    }
  }
  return split_variance(n0, s0, n, s);
}

int otsu_threshold(std::span<const std::uint64_t, 256> hist) {
  check_histogram(hist);
  std::uint64_t n = 0, s = 0;
  for (int b = 0; b < 256; ++b) {
    n += hist[b];
    s += hist[b] * static_cast<std::uint64_t>(b);
  }
  int best_t = 1;
  double best = -1.0;
  std::uint64_t n0 = 0, s0 = 0;
  for (int t = 1; t < 256; ++t) {
    n0 += hist[t - 1];
    s0 += hist[t - 1] * static_cast<std::uint64_t>(t - 1);
    const double v = split_variance(n0, s0, n, s);
    if (v > best) {
      best = v;
      best_t = t;
    }
  }
  return best_t;
}

BinaryMask binarize(const ProbabilityMap& pm, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw Error(ErrorCode::InvalidInput, fmt::format("threshold {} not in (0, 1)", threshold));
  }
  // Compare at the map's precision so a stored 0.7f meets a 0.7 threshold.
  const auto cut = static_cast<float>(threshold);
  const auto values = pm.values();
  std::vector<std::uint8_t> bits(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) bits[i] = values[i] >= cut ? 1 : 0;
  return BinaryMask(pm.width(), pm.height(), std::move(bits));
}

ImageRaster overlay(const ImageRaster& img_in, const BinaryMask& mask, Rgb color, double alpha) {
  if (img_in.width() != mask.width() || img_in.height() != mask.height()) {
    throw Error(ErrorCode::ShapeMismatch,
                fmt::format("image {}x{} vs mask {}x{}", img_in.width(), img_in.height(), mask.width(),
                            mask.height()));
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::InvalidInput, "alpha must be in [0, 1]");
  if (img_in.channels() != 1 && img_in.channels() != 3) {
    throw Error(ErrorCode::BadChannel, "overlay needs a gray or RGB raster");
  }
  const ImageRaster img = to_u8(img_in);
  const auto src = img.u8();
  const std::size_t pixels = mask.size();
  std::vector<std::uint8_t> out(pixels * 3);
  const std::uint8_t tint[3] = {color.r, color.g, color.b};
  for (std::size_t p = 0; p < pixels; ++p) {
    for (int c = 0; c < 3; ++c) {
      const std::uint8_t v = img.channels() == 3 ? src[p * 3 + c] : src[p];
      out[p * 3 + c] = mask.bits()[p]
                           ? static_cast<std::uint8_t>(std::lround((1.0 - alpha) * v + alpha * tint[c]))
                           : v;
    }
  }
  return ImageRaster::from_u8(img.width(), img.height(), 3, std::move(out));
}

ClassicalEngine::ClassicalEngine(std::string name, int band_a, int band_b)
    : name_(std::move(name)), band_a_(band_a), band_b_(band_b) {}

ProbabilityMap ClassicalEngine::predict(const ImageRaster& img) const {
  const auto index = water_index(img, band_a_, band_b_);
  const auto values = index.values();
  std::vector<int> bins(values.size());
  std::array<std::uint64_t, 256> hist{};
  for (std::size_t i = 0; i < values.size(); ++i) {
    bins[i] = static_cast<int>(std::lround(values[i] * 255.0f));
    ++hist[bins[i]];
  }
  int cut = otsu_threshold(hist);
  // A single occupied level has nothing to split; fall back to the plain
  // positive-index rule (bin 128 is index 0).
  if (between_class_variance(hist, cut) == 0.0) cut = 129;

  std::vector<float> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const int b = bins[i];
    const double p = b < cut ? 0.5 * b / cut : 0.5 + 0.5 * (b - cut) / std::max(1, 255 - cut);
    out[i] = static_cast<float>(std::clamp(p, 0.0, 1.0));
  }
  return ProbabilityMap(index.width(), index.height(), std::move(out));
}

std::shared_ptr<const SegmentationEngine> ClassicalEngine::ablate(std::string_view layer) const {
  throw Error(ErrorCode::UnknownLayer,
              fmt::format("classical engine has no layer '{}'", std::string(layer)));
}

std::shared_ptr<const SegmentationEngine> ablate(const SegmentationEngine& engine, std::string_view layer) {
  return engine.ablate(layer);
}

ActivationStats activation_stats(const SegmentationEngine& engine, const ImageRaster& img) {
  const auto* unet = dynamic_cast<const UNetEngine*>(&engine);
  if (unet == nullptr) {
    throw Error(ErrorCode::InvalidInput, "activation statistics need a UNet engine");
  }
  ActivationStats stats;
  unet->forward(img, [&](std::string_view name, const Tensor& t) {
    LayerActivation a;
    a.name = std::string(name);
    a.shape = {t.height, t.width, t.channels};
    double sum = 0.0;
    std::size_t zeros = 0;
    for (float v : t.data) {
      sum += v;
      if (std::abs(v) <= ActivationStats::kNearZero) ++zeros;
    }
    const auto n = static_cast<double>(t.data.size());
    a.mean = t.data.empty() ? 0.0 : sum / n;
    a.near_zero_fraction = t.data.empty() ? 0.0 : static_cast<double>(zeros) / n;
    stats.layers.push_back(std::move(a));
  });
  return stats;
}

}  // namespace floodlense
