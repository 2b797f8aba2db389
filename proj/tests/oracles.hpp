// Copyright 2026 The FloodLense Authors
// SPDX-License-Identifier: Apache-2.0

// Independent reference implementations and random generators shared by the
// unit tests and the acceptance binary. Nothing here calls the code under
// test except for constructing its value types.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "floodlense/evaluation.hpp"
#include "floodlense/raster_geo.hpp"
#include "floodlense/rng.hpp"
#include "floodlense/tensor.hpp"
#include "floodlense/weights.hpp"

namespace oracle {

using floodlense::BinaryMask;
using floodlense::ConfusionCounts;
using floodlense::MetricsReport;
using floodlense::MetricValue;
using floodlense::ProbabilityMap;
using floodlense::Rng;

// ---- generators ----

inline BinaryMask random_mask(Rng& rng, int w, int h, double p) {
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(w) * h);
  for (auto& b : bits) b = rng.uniform() < p ? 1 : 0;
  return BinaryMask(w, h, std::move(bits));
}

inline ProbabilityMap random_map(Rng& rng, int w, int h) {
  std::vector<float> v(static_cast<std::size_t>(w) * h);
  // Mix of exact threshold values, extremes and uniform noise.
  static constexpr float kSpecial[] = {0.0f, 0.3f, 0.4f, 0.5f, 0.6f, 0.7f, 1.0f};
  for (auto& x : v) {
    x = rng.uniform() < 0.2 ? kSpecial[rng.integer(0, 6)] : static_cast<float>(rng.uniform());
  }
  return ProbabilityMap(w, h, std::move(v));
}

inline ConfusionCounts random_counts(Rng& rng) {
  auto pick = [&]() -> std::uint64_t {
    switch (rng.integer(0, 3)) {
      case 0:
        return 0;
      case 1:
        return static_cast<std::uint64_t>(rng.integer(1, 10));
      case 2:
        return static_cast<std::uint64_t>(rng.integer(0, 100000));
      default:
        return static_cast<std::uint64_t>(rng.integer(0, 4000000000LL));
    }
  };
  return ConfusionCounts{pick(), pick(), pick(), pick()};
}

inline std::array<std::uint64_t, 256> random_histogram(Rng& rng) {
  std::array<std::uint64_t, 256> h{};
  switch (rng.integer(0, 3)) {
    case 0:  // dense
      for (auto& c : h) c = static_cast<std::uint64_t>(rng.integer(0, 1000));
      break;
    case 1: {  // a few spikes
      const int n = static_cast<int>(rng.integer(1, 4));
      for (int i = 0; i < n; ++i) h[rng.integer(0, 255)] += static_cast<std::uint64_t>(rng.integer(1, 50000));
      break;
    }
    case 2: {  // bimodal
      const double m0 = rng.uniform(20, 110), m1 = rng.uniform(140, 235);
      for (int i = 0; i < 5000; ++i) {
        const double v = (rng.uniform() < 0.5 ? m0 : m1) + 15.0 * rng.normal();
        h[std::clamp(static_cast<int>(std::lround(v)), 0, 255)] += 1;
      }
      break;
    }
    default:  // sparse random support
      for (auto& c : h) c = rng.uniform() < 0.1 ? static_cast<std::uint64_t>(rng.integer(1, 100)) : 0;
      break;
  }
  if (std::all_of(h.begin(), h.end(), [](auto c) { return c == 0; })) h[rng.integer(0, 255)] = 1;
  return h;
}

// ---- metrics via set cardinalities ----

struct SetMetrics {
  std::size_t predicted = 0, actual = 0, inter = 0, uni = 0, agree = 0, total = 0;
};

inline SetMetrics set_metrics(const BinaryMask& pred, const BinaryMask& gt) {
  std::set<std::size_t> a, b;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred.bits()[i]) a.insert(i);
    if (gt.bits()[i]) b.insert(i);
  }
  std::vector<std::size_t> inter, uni;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(inter));
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(uni));
  SetMetrics m;
  m.predicted = a.size();
  m.actual = b.size();
  m.inter = inter.size();
  m.uni = uni.size();
  m.total = pred.size();
  m.agree = m.total - (m.uni - m.inter);  // outside the symmetric difference
  return m;
}

inline MetricValue div(double num, double den) {
  if (den == 0.0) return std::nullopt;
  return num / den;
}

inline MetricsReport metrics_from_sets(const SetMetrics& s) {
  MetricsReport r;
  r.iou = div(static_cast<double>(s.inter), static_cast<double>(s.uni));
  r.dice = div(2.0 * static_cast<double>(s.inter), static_cast<double>(s.predicted) + static_cast<double>(s.actual));
  r.precision = div(static_cast<double>(s.inter), static_cast<double>(s.predicted));
  r.recall = div(static_cast<double>(s.inter), static_cast<double>(s.actual));
  if (r.precision && r.recall) r.f1 = div(2.0 * *r.precision * *r.recall, *r.precision + *r.recall);
  r.accuracy = div(static_cast<double>(s.agree), static_cast<double>(s.total));
  return r;
}

// ---- Otsu by exhaustive scan ----

inline double class_variance(const std::array<std::uint64_t, 256>& h, int t) {
  std::uint64_t n0 = 0, n1 = 0, s0 = 0, s1 = 0;
  for (int b = 0; b < 256; ++b) {
    if (b < t) {
      n0 += h[b];
      s0 += h[b] * static_cast<std::uint64_t>(b);
    } else {
      n1 += h[b];
      s1 += h[b] * static_cast<std::uint64_t>(b);
    }
  }
  if (n0 == 0 || n1 == 0) return 0.0;
  const double n = static_cast<double>(n0 + n1);
  const double w0 = static_cast<double>(n0) / n, w1 = static_cast<double>(n1) / n;
  const double d = static_cast<double>(s0) / static_cast<double>(n0) - static_cast<double>(s1) / static_cast<double>(n1);
  return w0 * w1 * d * d;
}

/// Smallest t in [1, 255] maximizing the between-class variance.
inline int otsu(const std::array<std::uint64_t, 256>& h) {
  int best_t = 1;
  double best = class_variance(h, 1);
  for (int t = 2; t < 256; ++t) {
    const double v = class_variance(h, t);
    if (v > best) {
      best = v;
      best_t = t;
    }
  }
  return best_t;
}

// ---- direct-summation convolution ----

/// HWC input, [ky][kx][c][f] kernel, zero padding. Accumulates in double.
inline std::vector<double> conv2d(const std::vector<double>& in, int h, int w, int c, const std::vector<double>& k,
                                  int kh, int kw, int f, const std::vector<double>& bias, int stride, int pad,
                                  int& out_h, int& out_w) {
  out_h = (h + 2 * pad - kh) / stride + 1;
  out_w = (w + 2 * pad - kw) / stride + 1;
  std::vector<double> out(static_cast<std::size_t>(out_h) * out_w * f, 0.0);
  for (int oy = 0; oy < out_h; ++oy) {
    for (int ox = 0; ox < out_w; ++ox) {
      for (int of = 0; of < f; ++of) {
        double acc = bias.empty() ? 0.0 : bias[of];
        for (int ky = 0; ky < kh; ++ky) {
          for (int kx = 0; kx < kw; ++kx) {
            const int iy = oy * stride + ky - pad;
            const int ix = ox * stride + kx - pad;
            if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
            for (int ic = 0; ic < c; ++ic) {
              acc += in[(static_cast<std::size_t>(iy) * w + ix) * c + ic] *
                     k[((static_cast<std::size_t>(ky) * kw + kx) * c + ic) * f + of];
            }
          }
        }
        out[(static_cast<std::size_t>(oy) * out_w + ox) * f + of] = acc;
      }
    }
  }
  return out;
}

// ---- straight-line two-level UNet ----

struct Map {
  int h = 0, w = 0, c = 0;
  std::vector<double> v;
  double& at(int y, int x, int ch) { return v[(static_cast<std::size_t>(y) * w + x) * c + ch]; }
  double at(int y, int x, int ch) const { return v[(static_cast<std::size_t>(y) * w + x) * c + ch]; }
};

inline Map layer(const Map& in, const floodlense::WeightArchive& a, const std::string& name, bool relu) {
  const auto* wt = a.find(name + ".weight");
  const auto* b = a.find(name + ".bias");
  const int k = static_cast<int>(wt->shape[0]);
  const int f = static_cast<int>(wt->shape[3]);
  std::vector<double> kd(wt->values.begin(), wt->values.end());
  std::vector<double> bd(b->values.begin(), b->values.end());
  Map out;
  out.c = f;
  out.v = conv2d(in.v, in.h, in.w, in.c, kd, k, k, f, bd, 1, k / 2, out.h, out.w);
  if (relu) {
    for (auto& x : out.v) x = std::max(0.0, x);
  }
  return out;
}

/// enc0 (2 convs) -> pool -> enc1 (2 convs) -> upsample -> dec0_up ->
/// concat(up, enc0) -> dec0 (2 convs) -> head -> logistic.
inline std::vector<double> unet2(const floodlense::ImageRaster& img, const floodlense::WeightArchive& a) {
  Map x{img.height(), img.width(), img.channels(), {}};
  for (int y = 0; y < x.h; ++y) {
    for (int xx = 0; xx < x.w; ++xx) {
      for (int c = 0; c < x.c; ++c) {
        x.v.push_back(img.is_normalized() ? img.normalized_at(xx, y, c) : img.u8_at(xx, y, c) / 255.0);
      }
    }
  }
  const Map e0 = layer(layer(x, a, "enc0_conv1", true), a, "enc0_conv2", true);
  Map pooled{e0.h / 2, e0.w / 2, e0.c, std::vector<double>(static_cast<std::size_t>(e0.h / 2) * (e0.w / 2) * e0.c)};
  for (int y = 0; y < pooled.h; ++y) {
    for (int xx = 0; xx < pooled.w; ++xx) {
      for (int c = 0; c < e0.c; ++c) {
        pooled.at(y, xx, c) = std::max({e0.at(2 * y, 2 * xx, c), e0.at(2 * y, 2 * xx + 1, c),
                                        e0.at(2 * y + 1, 2 * xx, c), e0.at(2 * y + 1, 2 * xx + 1, c)});
      }
    }
  }
  const Map e1 = layer(layer(pooled, a, "enc1_conv1", true), a, "enc1_conv2", true);
  Map up{e0.h, e0.w, e1.c, std::vector<double>(static_cast<std::size_t>(e0.h) * e0.w * e1.c)};
  for (int y = 0; y < up.h; ++y) {
    for (int xx = 0; xx < up.w; ++xx) {
      for (int c = 0; c < e1.c; ++c) up.at(y, xx, c) = e1.at(y / 2, xx / 2, c);
    }
  }
  const Map d = layer(up, a, "dec0_up", false);
  Map cat{d.h, d.w, d.c + e0.c, {}};
  for (int y = 0; y < d.h; ++y) {
    for (int xx = 0; xx < d.w; ++xx) {
      for (int c = 0; c < d.c; ++c) cat.v.push_back(d.at(y, xx, c));
      for (int c = 0; c < e0.c; ++c) cat.v.push_back(e0.at(y, xx, c));
    }
  }
  const Map head = layer(layer(layer(cat, a, "dec0_conv1", true), a, "dec0_conv2", true), a, "head", false);
  std::vector<double> p;
  for (double z : head.v) p.push_back(1.0 / (1.0 + std::exp(-z)));
  return p;
}

// ---- misc ----

inline std::filesystem::path temp_dir(const std::string& tag) {
  static Rng rng(std::random_device{}());
  auto dir = std::filesystem::temp_directory_path() / ("floodlense_" + tag + "_" + std::to_string(rng.next() % 1000000007ULL));
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace oracle
