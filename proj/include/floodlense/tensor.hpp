// Copyright 2026 The FloodLense Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace floodlense {

/// Dense H x W x C feature map, channel-interleaved (HWC).
struct Tensor {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<float> data;

  Tensor() = default;
  Tensor(int h, int w, int c, float fill = 0.0f);
  Tensor(int h, int w, int c, std::vector<float> values);

  std::size_t size() const { return data.size(); }
  std::size_t offset(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
  float& at(int y, int x, int c) { return data[offset(y, x, c)]; }
  float at(int y, int x, int c) const { return data[offset(y, x, c)]; }
};

/// kh x kw x in_channels x out_channels, stored in that order (out fastest).
struct ConvKernel {
  int kh = 0;
  int kw = 0;
  int in_channels = 0;
  int out_channels = 0;
  std::vector<float> weights;

  ConvKernel() = default;
  ConvKernel(int kh, int kw, int in_c, int out_c, std::vector<float> values);

  std::size_t offset(int ky, int kx, int c, int f) const {
    return ((static_cast<std::size_t>(ky) * kw + kx) * in_channels + c) * out_channels + f;
  }
  float at(int ky, int kx, int c, int f) const { return weights[offset(ky, kx, c, f)]; }
};

/// Zero-padded cross-correlation. Output is
/// floor((H + 2*pad - kh) / stride) + 1 by the same along W, times out_channels.
/// An empty bias means no bias.
Tensor conv2d(const Tensor& input, const ConvKernel& kernel, std::span<const float> bias, int stride,
              int pad);

void relu_inplace(Tensor& t);
void sigmoid_inplace(Tensor& t);
Tensor max_pool2(const Tensor& t);
Tensor upsample2_nearest(const Tensor& t);
/// Channel concatenation; a's channels come first.
Tensor concat_channels(const Tensor& a, const Tensor& b);

}  // namespace floodlense
