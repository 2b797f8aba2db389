// Copyright 2026 The FloodLense Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "floodlense/error.hpp"
#include "floodlense/png_io.hpp"
#include "floodlense/rng.hpp"
#include "oracles.hpp"

using namespace floodlense;

TEST_CASE("PNG encode/decode round-trips gray and RGB exactly") {
  Rng rng(3);
  for (int ch : {1, 3}) {
    std::vector<std::uint8_t> px(17 * 9 * ch);
    for (auto& p : px) p = static_cast<std::uint8_t>(rng.integer(0, 255));
    const auto img = ImageRaster::from_u8(17, 9, ch, px);
    const auto bytes = encode_png(img);
    REQUIRE(bytes.size() > 8);
    CHECK(bytes[1] == 'P');
    CHECK(decode_png(bytes) == img);
  }
}

TEST_CASE("PNG files round-trip and bad inputs are reported") {
  const auto dir = oracle::temp_dir("png");
  const auto img = ImageRaster::filled_u8(4, 4, 3, 200);
  write_png(img, dir / "a.png");
  CHECK(read_png(dir / "a.png") == img);

  try {
    read_png(dir / "missing.png");
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoError);
  }
  const std::vector<std::uint8_t> junk = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  try {
    decode_png(junk);
    FAIL("expected DecodeError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DecodeError);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("mask_to_raster maps water to 255") {
  const auto r = mask_to_raster(BinaryMask(2, 1, {1, 0}));
  CHECK(r.channels() == 1);
  CHECK(r.u8_at(0, 0, 0) == 255);
  CHECK(r.u8_at(1, 0, 0) == 0);
}
