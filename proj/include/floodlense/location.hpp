// Copyright 2026 The FloodLense Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "floodlense/raster_geo.hpp"

namespace floodlense {

enum class ExtractionMethod { Llm, Gazetteer };

struct LocationCandidate {
  std::string name;
  double confidence = 0.0;
  ExtractionMethod method = ExtractionMethod::Gazetteer;
};

struct GazetteerEntry {
  std::string canonical_name;
  std::vector<std::string> aliases;
  GeoPoint point;
};

/// Immutable after construction; canonical names are unique (case-insensitive).
class Gazetteer {
 public:
  explicit Gazetteer(std::vector<GazetteerEntry> entries);

  /// JSON-lines: {"name": str, "aliases": [str], "lat": num, "lon": num} per line.
  static Gazetteer load(const std::filesystem::path& path);
  static Gazetteer parse(std::string_view jsonl);
  std::string to_jsonl() const;

  const std::vector<GazetteerEntry>& entries() const { return entries_; }

  /// Case-insensitive match on canonical name or any alias.
  const GazetteerEntry* find(std::string_view name) const;

  /// Every lowercased name/alias paired with its entry index.
  const std::vector<std::pair<std::string, std::size_t>>& keys() const { return keys_; }

 private:
  std::vector<GazetteerEntry> entries_;
  std::vector<std::pair<std::string, std::size_t>> keys_;
  std::unordered_map<std::string, std::size_t> index_;
};

class LocationExtractor {
 public:
  virtual ~LocationExtractor() = default;
  /// Throws NoLocationFound, BackendUnavailable, InvalidInput (empty text).
  virtual LocationCandidate extract(std::string_view text) const = 0;
};

/// Offline extractor: fuzzy-matches query tokens and bigrams against the
/// gazetteer, falling back to capitalized words for places it does not know.
class GazetteerExtractor final : public LocationExtractor {
 public:
  explicit GazetteerExtractor(std::shared_ptr<const Gazetteer> gazetteer);
  LocationCandidate extract(std::string_view text) const override;

 private:
  std::shared_ptr<const Gazetteer> gazetteer_;
};

/// Chat-completion transport. Implementations must be callable concurrently
/// and throw Error(BackendUnavailable) on any transport or protocol failure.
class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual std::string complete(const std::string& system_prompt, const std::string& user_text) const = 0;
};

class LlmExtractor final : public LocationExtractor {
 public:
  static constexpr std::string_view kSystemPrompt =
      "You extract locations from user messages. Reply with the single most likely place name "
      "mentioned in the message and nothing else. If the message names no place, reply NONE.";

  explicit LlmExtractor(std::shared_ptr<const ChatClient> client);
  LocationCandidate extract(std::string_view text) const override;

 private:
  std::shared_ptr<const ChatClient> client_;
};

class Geocoder {
 public:
  virtual ~Geocoder() = default;
  /// Throws InvalidInput (empty name), NotFound, ServiceError.
  virtual GeoPoint geocode(std::string_view name) const = 0;
};

class GazetteerGeocoder final : public Geocoder {
 public:
  explicit GazetteerGeocoder(std::shared_ptr<const Gazetteer> gazetteer);
  GeoPoint geocode(std::string_view name) const override;

 private:
  std::shared_ptr<const Gazetteer> gazetteer_;
};

LocationCandidate extract_location(std::string_view text, const LocationExtractor& extractor);
GeoPoint geocode(std::string_view name, const Geocoder& geocoder);

/// Levenshtein distance over bytes.
std::size_t edit_distance(std::string_view a, std::string_view b);

struct InterfaceCase {
  std::string query;
  std::optional<std::string> expected;  // nullopt: no coordinates should come back
};

struct InterfaceCaseOutcome {
  std::string query;
  std::optional<std::string> extracted;
  std::optional<GeoPoint> point;
  bool extraction_correct = false;
  bool erroneous = false;
};

struct InterfaceReport {
  double extraction_accuracy = 0.0;
  double geocoding_success_rate = 0.0;
  double error_rate = 0.0;
  std::vector<InterfaceCaseOutcome> outcomes;
};

/// extraction_accuracy = correct / total
/// geocoding_success_rate = geocoded / extraction successes (0 when none)
/// error_rate = (wrong geocodes + failures on valid cases) / total
/// An expected-failure case counts as correctly extracted when no
/// coordinates come back, and as a wrong geocode when they do.
InterfaceReport evaluate_interface(const std::vector<InterfaceCase>& cases,
                                   const LocationExtractor& extractor, const Geocoder& geocoder);

std::vector<InterfaceCase> load_interface_cases(const std::filesystem::path& path);
std::vector<InterfaceCase> parse_interface_cases(std::string_view jsonl);

}  // namespace floodlense
