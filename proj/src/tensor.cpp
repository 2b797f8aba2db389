// Copyright 2026 The FloodLense Authors
// SPDX-License-Identifier: Apache-2.0

#include "floodlense/tensor.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "floodlense/error.hpp"

namespace floodlense {

Tensor::Tensor(int h, int w, int c, float fill) : height(h), width(w), channels(c) {
  if (h < 0 || w < 0 || c < 0) throw Error(ErrorCode::BadDimensions, "negative tensor dims");
  data.assign(static_cast<std::size_t>(h) * w * c, fill);
}

Tensor::Tensor(int h, int w, int c, std::vector<float> values)
    : height(h), width(w), channels(c), data(std::move(values)) {
  if (h < 0 || w < 0 || c < 0) throw Error(ErrorCode::BadDimensions, "negative tensor dims");
  if (data.size() != static_cast<std::size_t>(h) * w * c) {
    throw Error(ErrorCode::ShapeMismatch, "tensor value count does not match dims");
  }
}

ConvKernel::ConvKernel(int kh_, int kw_, int in_c, int out_c, std::vector<float> values)
    : kh(kh_), kw(kw_), in_channels(in_c), out_channels(out_c), weights(std::move(values)) {
  if (kh < 1 || kw < 1 || in_c < 1 || out_c < 1) {
    throw Error(ErrorCode::ShapeMismatch, "kernel dims must be positive");
  }
  if (weights.size() != static_cast<std::size_t>(kh) * kw * in_c * out_c) {
    throw Error(ErrorCode::ShapeMismatch, "kernel value count does not match dims");
  }
}

Tensor conv2d(const Tensor& input, const ConvKernel& k, std::span<const float> bias, int stride, int pad) {
  if (k.kh % 2 == 0 || k.kw % 2 == 0) {
    throw Error(ErrorCode::ShapeMismatch, fmt::format("kernel {}x{} is not odd-sized", k.kh, k.kw));
  }
  if (stride < 1 || pad < 0) throw Error(ErrorCode::ShapeMismatch, "stride must be >= 1 and pad >= 0");
  if (input.channels != k.in_channels) {
    throw Error(ErrorCode::ShapeMismatch,
                fmt::format("input has {} channels, kernel expects {}", input.channels, k.in_channels));
  }
  if (!bias.empty() && bias.size() != static_cast<std::size_t>(k.out_channels)) {
    throw Error(ErrorCode::ShapeMismatch, "bias length does not match kernel outputs");
  }
  const int padded_h = input.height + 2 * pad;
  const int padded_w = input.width + 2 * pad;
  if (padded_h < k.kh || padded_w < k.kw) {
    throw Error(ErrorCode::ShapeMismatch, "kernel larger than padded input");
  }
  const int out_h = (padded_h - k.kh) / stride + 1;
  const int out_w = (padded_w - k.kw) / stride + 1;
  const int cin = k.in_channels;
  const int cout = k.out_channels;

  Tensor out(out_h, out_w, cout);
  for (int oy = 0; oy < out_h; ++oy) {
    for (int ox = 0; ox < out_w; ++ox) {
      float* acc = &out.data[out.offset(oy, ox, 0)];
      if (!bias.empty()) std::copy(bias.begin(), bias.end(), acc);
      for (int ky = 0; ky < k.kh; ++ky) {
        const int iy = oy * stride + ky - pad;
        if (iy < 0 || iy >= input.height) continue;
        for (int kx = 0; kx < k.kw; ++kx) {
          const int ix = ox * stride + kx - pad;
          if (ix < 0 || ix >= input.width) continue;
          const float* in_px = &input.data[input.offset(iy, ix, 0)];
          const float* w = &k.weights[k.offset(ky, kx, 0, 0)];
          for (int c = 0; c < cin; ++c) {
            const float v = in_px[c];
            const float* wc = w + static_cast<std::size_t>(c) * cout;
            for (int f = 0; f < cout; ++f) acc[f] += v * wc[f];
          }
        }
      }
    }
  }
  return out;
}

void relu_inplace(Tensor& t) {
  for (auto& v : t.data) v = v > 0.0f ? v : 0.0f;
}

void sigmoid_inplace(Tensor& t) {
  for (auto& v : t.data) {
    const float s = 1.0f / (1.0f + std::exp(-v));
    v = std::clamp(s, 0.0f, 1.0f);
  }
}

Tensor max_pool2(const Tensor& t) {
  Tensor out(t.height / 2, t.width / 2, t.channels);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      for (int c = 0; c < t.channels; ++c) {
        out.at(y, x, c) = std::max({t.at(2 * y, 2 * x, c), t.at(2 * y, 2 * x + 1, c),
                                    t.at(2 * y + 1, 2 * x, c), t.at(2 * y + 1, 2 * x + 1, c)});
      }
    }
  }
  return out;
}

Tensor upsample2_nearest(const Tensor& t) {
  Tensor out(t.height * 2, t.width * 2, t.channels);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      const float* src = &t.data[t.offset(y / 2, x / 2, 0)];
      std::copy(src, src + t.channels, &out.data[out.offset(y, x, 0)]);
    }
  }
  return out;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  if (a.height != b.height || a.width != b.width) {
    throw Error(ErrorCode::ShapeMismatch, "cannot concatenate tensors of different spatial size");
  }
  Tensor out(a.height, a.width, a.channels + b.channels);
  for (int y = 0; y < a.height; ++y) {
    for (int x = 0; x < a.width; ++x) {
      float* dst = &out.data[out.offset(y, x, 0)];
      const float* pa = &a.data[a.offset(y, x, 0)];
      const float* pb = &b.data[b.offset(y, x, 0)];
      std::copy(pa, pa + a.channels, dst);
      std::copy(pb, pb + b.channels, dst + a.channels);
    }
  }
  return out;
}

}  // namespace floodlense
