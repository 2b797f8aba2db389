// Copyright 2026 The FloodLense Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace floodlense {

enum class ErrorCode {
  InvalidInput,
  AntimeridianCrossing,
  AlreadyNormalized,
  NoLocationFound,
  BackendUnavailable,
  NotFound,
  ServiceError,
  NoSceneAvailable,
  IoError,
  ShapeMismatch,
  WeightMismatch,
  BadDimensions,
  BadChannel,
  EmptyHistogram,
  UnknownLayer,
  FormatError,
  MissingMask,
  DecodeError,
};

std::string_view to_string(ErrorCode code);

/// The single exception type thrown across the library. Callers branch on
/// code(); what() carries a human-readable detail line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace floodlense
