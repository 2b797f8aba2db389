// Copyright 2026 The FloodLense Authors
// SPDX-License-Identifier: Apache-2.0

#include "floodlense/error.hpp"

#include <fmt/format.h>

namespace floodlense {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::AntimeridianCrossing: return "AntimeridianCrossing";
    case ErrorCode::AlreadyNormalized: return "AlreadyNormalized";
    case ErrorCode::NoLocationFound: return "NoLocationFound";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::ServiceError: return "ServiceError";
    case ErrorCode::NoSceneAvailable: return "NoSceneAvailable";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::WeightMismatch: return "WeightMismatch";
    case ErrorCode::BadDimensions: return "BadDimensions";
    case ErrorCode::BadChannel: return "BadChannel";
    case ErrorCode::EmptyHistogram: return "EmptyHistogram";
    case ErrorCode::UnknownLayer: return "UnknownLayer";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::MissingMask: return "MissingMask";
    case ErrorCode::DecodeError: return "DecodeError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(fmt::format("{}: {}", to_string(code), detail)), code_(code) {}

}  // namespace floodlense
