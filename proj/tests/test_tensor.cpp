// Copyright 2026 The FloodLense Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "floodlense/error.hpp"
#include "floodlense/tensor.hpp"
#include "oracles.hpp"

using namespace floodlense;

TEST_CASE("conv2d matches direct summation on random shapes") {
  Rng rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const int k = std::array{1, 3, 5}[rng.integer(0, 2)];
    const int stride = static_cast<int>(rng.integer(1, 3));
    const int pad = static_cast<int>(rng.integer(0, k / 2 + 1));
    const int h = static_cast<int>(rng.integer(k, 14)), w = static_cast<int>(rng.integer(k, 14));
    const int c = static_cast<int>(rng.integer(1, 5)), f = static_cast<int>(rng.integer(1, 6));
    std::vector<float> in(static_cast<std::size_t>(h) * w * c), kern(static_cast<std::size_t>(k) * k * c * f),
        bias(f);
    for (auto& v : in) v = static_cast<float>(rng.uniform(-1, 1));
    for (auto& v : kern) v = static_cast<float>(rng.uniform(-1, 1));
    for (auto& v : bias) v = static_cast<float>(rng.uniform(-1, 1));
    const bool with_bias = rng.uniform() < 0.7;

    const auto out = conv2d(Tensor(h, w, c, in), ConvKernel(k, k, c, f, kern),
                            with_bias ? std::span<const float>(bias) : std::span<const float>{}, stride, pad);
    int oh = 0, ow = 0;
    const auto ref = oracle::conv2d({in.begin(), in.end()}, h, w, c, {kern.begin(), kern.end()}, k, k, f,
                                    with_bias ? std::vector<double>(bias.begin(), bias.end()) : std::vector<double>{},
                                    stride, pad, oh, ow);
    REQUIRE(out.height == oh);
    REQUIRE(out.width == ow);
    REQUIRE(out.channels == f);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      REQUIRE(std::abs(out.data[i] - ref[i]) <= 1e-5 * std::max(1.0, std::abs(ref[i])));
    }
  }
}

TEST_CASE("conv2d validates its arguments") {
  const Tensor t(4, 4, 2);
  const ConvKernel k(3, 3, 2, 1, std::vector<float>(18, 0.0f));
  const ConvKernel wrong(3, 3, 3, 1, std::vector<float>(27, 0.0f));
  CHECK_THROWS_AS(conv2d(t, wrong, {}, 1, 1), Error);
  CHECK_THROWS_AS(conv2d(t, k, {}, 0, 1), Error);
}

TEST_CASE("pooling, upsampling, concat and activations") {
  Tensor t(2, 4, 1, std::vector<float>{1, 5, 2, 0, 3, 4, -1, 7});
  const auto p = max_pool2(t);
  CHECK(p.height == 1);
  CHECK(p.width == 2);
  CHECK(p.data == std::vector<float>{5, 7});

  const auto u = upsample2_nearest(p);
  CHECK(u.height == 2);
  CHECK(u.width == 4);
  CHECK(u.data == std::vector<float>{5, 5, 7, 7, 5, 5, 7, 7});

  const auto cat = concat_channels(Tensor(1, 1, 2, {1, 2}), Tensor(1, 1, 1, {3}));
  CHECK(cat.data == std::vector<float>{1, 2, 3});
  CHECK_THROWS_AS(concat_channels(Tensor(1, 1, 1), Tensor(2, 1, 1)), Error);

  Tensor r(1, 3, 1, {-1, 0, 2});
  relu_inplace(r);
  CHECK(r.data == std::vector<float>{0, 0, 2});
  Tensor s(1, 3, 1, {0, 1000, -1000});
  sigmoid_inplace(s);
  CHECK(s.data[0] == 0.5f);
  CHECK(s.data[1] == doctest::Approx(1.0));
  CHECK(s.data[2] == doctest::Approx(0.0));
  CHECK(s.data[2] >= 0.0f);
}
