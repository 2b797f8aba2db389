// Copyright 2026 The FloodLense Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <fstream>

#include "floodlense/error.hpp"
#include "floodlense/segmentation.hpp"
#include "floodlense/weights.hpp"
#include "oracles.hpp"

using namespace floodlense;

namespace {

ErrorCode parse_code(std::vector<std::uint8_t> bytes) {
  try {
    parse_weights(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::NotFound;  // sentinel: parse unexpectedly succeeded
}

}  // namespace

TEST_CASE("weight archives round-trip bit-exactly through files") {
  const auto archive = make_random_unet_weights(UNetConfig{2, 4, 3, 1}, 5);
  const auto dir = oracle::temp_dir("weights");
  save_weights(archive, dir / "w.flwt");
  const auto loaded = load_weights(dir / "w.flwt");
  CHECK(loaded.bit_equal(archive));
  CHECK(serialize_weights(loaded) == serialize_weights(archive));
  std::filesystem::remove_all(dir);
}

TEST_CASE("serialized layout is little-endian with a FLWT header") {
  WeightArchive a;
  a.add("x", {2}, {1.0f, -2.0f});
  const auto bytes = serialize_weights(a);
  const std::vector<std::uint8_t> expected = {
      'F', 'L', 'W', 'T', 1, 0, 0, 0,  // magic, version
      1, 0, 0, 0,                      // entry count
      1, 0, 'x',                       // name
      1, 2, 0, 0, 0,                   // ndim, dims
      0x00, 0x00, 0x80, 0x3f,          // 1.0f
      0x00, 0x00, 0x00, 0xc0,          // -2.0f
  };
  CHECK(bytes == expected);
}

TEST_CASE("corrupted archives are rejected with FormatError") {
  WeightArchive a;
  a.add("layer.weight", {2, 2}, {1, 2, 3, 4});
  const auto good = serialize_weights(a);

  auto bad_magic = good;
  bad_magic[0] = 'X';
  CHECK(parse_code(bad_magic) == ErrorCode::FormatError);

  auto truncated = good;
  truncated.resize(good.size() - 3);
  CHECK(parse_code(truncated) == ErrorCode::FormatError);

  auto trailing = good;
  trailing.push_back(0);
  CHECK(parse_code(trailing) == ErrorCode::FormatError);

  auto version = good;
  version[4] = 2;
  CHECK(parse_code(version) == ErrorCode::FormatError);

  auto huge_dims = good;
  huge_dims[30] = 0xff;  // high byte of the first dim
  CHECK(parse_code(huge_dims) == ErrorCode::FormatError);

  CHECK(parse_code({}) == ErrorCode::FormatError);
}

TEST_CASE("archives reject duplicate names, bad counts and non-finite values") {
  WeightArchive a;
  a.add("w", {1}, {0.0f});
  CHECK_THROWS_AS(a.add("w", {1}, {0.0f}), Error);
  CHECK_THROWS_AS(a.add("v", {2}, {0.0f}), Error);
  CHECK_THROWS_AS(a.add("n", {1}, {NAN}), Error);
  CHECK(a.find("w") != nullptr);
  CHECK(a.find("missing") == nullptr);
}
