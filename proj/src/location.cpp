// Copyright 2026 The FloodLense Authors
// SPDX-License-Identifier: Apache-2.0

#include "floodlense/location.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <fmt/format.h>
#include <json.hpp>

#include "floodlense/error.hpp"

namespace floodlense {

namespace {

using nlohmann::json;

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// Function words and flood-query vocabulary that never name a place.
const std::unordered_set<std::string>& stopwords() {
  static const std::unordered_set<std::string> words = {
      "a", "about", "alert", "alerts", "all", "an", "and", "any", "are", "area", "around", "at",
      "be", "by", "can", "check", "condition", "conditions", "current", "currently", "do", "does",
      "flood", "flooded", "flooding", "floods", "for", "forecast", "from", "give", "happening",
      "has", "have", "hello", "here", "hi", "how", "i", "image", "images", "in", "is", "it", "its",
      "latest", "level", "levels", "like", "look", "map", "me", "my", "near", "news", "now", "of",
      "on", "or", "please", "rain", "rainfall", "risk", "satellite", "see", "show", "situation",
      "some", "status", "storm", "tell", "thanks", "that", "the", "there", "this", "to", "today",
      "tsunami", "update", "updates", "want", "warning", "warnings", "was", "water", "weather",
      "were", "what", "whats", "where", "which", "with", "you",
  };
  return words;
}

struct Token {
  std::string original;
  std::string lowered;
  bool stop = false;
};

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::string current;
  auto flush = [&] {
    if (current.empty()) return;
    Token t;
    t.original = current;
    t.lowered = lower(current);
    t.stop = stopwords().contains(t.lowered);
    tokens.push_back(std::move(t));
    current.clear();
  };
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    // Bytes >= 0x80 belong to UTF-8 sequences; keep them inside words.
    if (std::isalnum(u) || u >= 0x80) {
      current.push_back(c);
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

struct Match {
  std::string name;
  double confidence = 0.0;
  std::size_t span = 0;
  std::size_t position = 0;
  bool from_gazetteer = false;
};

bool better(const Match& a, const Match& b) {
  if (a.confidence != b.confidence) return a.confidence > b.confidence;
  if (a.from_gazetteer != b.from_gazetteer) return a.from_gazetteer;
  if (a.span != b.span) return a.span > b.span;
  return a.position < b.position;
}

constexpr double kProperNounConfidence = 0.4;
constexpr std::size_t kMinTokenLength = 3;

GazetteerEntry parse_entry(const json& j) {
  GazetteerEntry e;
  e.canonical_name = j.at("name").get<std::string>();
  if (j.contains("aliases")) e.aliases = j.at("aliases").get<std::vector<std::string>>();
  e.point = GeoPoint::make(j.at("lat").get<double>(), j.at("lon").get<double>());
  return e;
}

template <typename F>
void for_each_line(std::string_view text, F&& f) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    const auto line = trim(text.substr(0, nl));
    if (!line.empty()) f(line, line_no);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, fmt::format("cannot open {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      const std::size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      row[j] = std::min({up + 1, row[j - 1] + 1, sub});
      diag = up;
    }
  }
  return row[b.size()];
}

Gazetteer::Gazetteer(std::vector<GazetteerEntry> entries) : entries_(std::move(entries)) {
  std::unordered_set<std::string> canonical;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (trim(e.canonical_name).empty()) {
      throw Error(ErrorCode::FormatError, "gazetteer entry with empty name");
    }
    if (!canonical.insert(lower(e.canonical_name)).second) {
      throw Error(ErrorCode::FormatError,
                  fmt::format("duplicate gazetteer name '{}'", e.canonical_name));
    }
  }
  // Canonical names claim their keys before any alias can.
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    auto key = lower(entries_[i].canonical_name);
    index_.emplace(key, i);
    keys_.emplace_back(std::move(key), i);
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    for (const auto& alias : entries_[i].aliases) {
      auto key = lower(trim(alias));
      if (key.empty()) continue;
      index_.emplace(key, i);
      keys_.emplace_back(std::move(key), i);
    }
  }
}

Gazetteer Gazetteer::parse(std::string_view jsonl) {
  std::vector<GazetteerEntry> entries;
  for_each_line(jsonl, [&](std::string_view line, std::size_t line_no) {
    try {
      entries.push_back(parse_entry(json::parse(line)));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::FormatError, fmt::format("gazetteer line {}: {}", line_no, e.what()));
    } catch (const Error& e) {
      throw Error(ErrorCode::FormatError, fmt::format("gazetteer line {}: {}", line_no, e.what()));
    }
  });
  return Gazetteer(std::move(entries));
}

Gazetteer Gazetteer::load(const std::filesystem::path& path) { return parse(slurp(path)); }

std::string Gazetteer::to_jsonl() const {
  std::string out;
  for (const auto& e : entries_) {
    nlohmann::ordered_json j;
    j["name"] = e.canonical_name;
    j["aliases"] = e.aliases;
    j["lat"] = e.point.lat;
    j["lon"] = e.point.lon;
    out += j.dump();
    out += '\n';
  }
  return out;
}

const GazetteerEntry* Gazetteer::find(std::string_view name) const {
  const auto it = index_.find(lower(trim(name)));
  return it == index_.end() ? nullptr : &entries_[it->second];
}

GazetteerExtractor::GazetteerExtractor(std::shared_ptr<const Gazetteer> gazetteer)
    : gazetteer_(std::move(gazetteer)) {}

LocationCandidate GazetteerExtractor::extract(std::string_view text) const {
  if (trim(text).empty()) throw Error(ErrorCode::InvalidInput, "empty query text");
  const auto tokens = tokenize(text);

  std::optional<Match> best;
  auto offer = [&](Match m) {
    if (!best || better(m, *best)) best = std::move(m);
  };

  auto try_span = [&](const std::string& span, std::size_t n_tokens, std::size_t position) {
    // Distance budget scales with the query span: ceil(len / 3).
    const std::size_t budget = (span.size() + 2) / 3;
    for (const auto& [key, idx] : gazetteer_->keys()) {
      const std::size_t longer = std::max(span.size(), key.size());
      const std::size_t shorter = std::min(span.size(), key.size());
      if (longer - shorter > budget) continue;
      const std::size_t d = edit_distance(span, key);
      if (d > budget) continue;
      offer(Match{gazetteer_->entries()[idx].canonical_name,
                  1.0 - static_cast<double>(d) / static_cast<double>(longer), n_tokens, position,
                  true});
    }
  };

  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& t = tokens[i];
    if (t.stop) continue;
    if (t.lowered.size() >= kMinTokenLength) try_span(t.lowered, 1, i);
    if (i + 1 < tokens.size() && !tokens[i + 1].stop) {
      try_span(t.lowered + " " + tokens[i + 1].lowered, 2, i);
    }
  }

  // Unknown proper nouns: runs of capitalized content words past the first token.
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    auto capitalized = [&](std::size_t k) {
      const auto& t = tokens[k];
      return !t.stop && t.original.size() >= kMinTokenLength &&
             std::isupper(static_cast<unsigned char>(t.original.front()));
    };
    if (!capitalized(i)) continue;
    std::string name = tokens[i].original;
    std::size_t j = i + 1;
    while (j < tokens.size() && capitalized(j)) name += " " + tokens[j++].original;
    offer(Match{name, kProperNounConfidence, j - i, i, false});
    i = j - 1;
  }

  if (!best) {
    throw Error(ErrorCode::NoLocationFound,
                fmt::format("no place name recognized in '{}'", std::string(text)));
  }
  return LocationCandidate{best->name, best->confidence, ExtractionMethod::Gazetteer};
}

LlmExtractor::LlmExtractor(std::shared_ptr<const ChatClient> client) : client_(std::move(client)) {}

LocationCandidate LlmExtractor::extract(std::string_view text) const {
  if (trim(text).empty()) throw Error(ErrorCode::InvalidInput, "empty query text");
  std::string reply;
  try {
    reply = client_->complete(std::string(kSystemPrompt), std::string(text));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::BackendUnavailable) throw;
    throw Error(ErrorCode::BackendUnavailable, e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::BackendUnavailable, e.what());
  }
  auto name = std::string(trim(reply));
  // Models sometimes wrap the answer in quotes or end with a period.
  while (!name.empty() && (name.front() == '"' || name.front() == '\'')) name.erase(0, 1);
  while (!name.empty() && (name.back() == '"' || name.back() == '\'' || name.back() == '.')) {
    name.pop_back();
  }
  name = std::string(trim(name));
  if (name.empty() || lower(name) == "none") {
    throw Error(ErrorCode::NoLocationFound,
                fmt::format("model found no place in '{}'", std::string(text)));
  }
  // The hosted model does not report a score.
  return LocationCandidate{name, 1.0, ExtractionMethod::Llm};
}

GazetteerGeocoder::GazetteerGeocoder(std::shared_ptr<const Gazetteer> gazetteer)
    : gazetteer_(std::move(gazetteer)) {}

GeoPoint GazetteerGeocoder::geocode(std::string_view name) const {
  if (trim(name).empty()) throw Error(ErrorCode::InvalidInput, "empty location name");
  const auto* entry = gazetteer_->find(name);
  if (entry == nullptr) {
    throw Error(ErrorCode::NotFound, fmt::format("'{}' is not a known place", std::string(name)));
  }
  return entry->point;
}

LocationCandidate extract_location(std::string_view text, const LocationExtractor& extractor) {
  return extractor.extract(text);
}

GeoPoint geocode(std::string_view name, const Geocoder& geocoder) {
  if (trim(name).empty()) throw Error(ErrorCode::InvalidInput, "empty location name");
  return geocoder.geocode(name);
}

InterfaceReport evaluate_interface(const std::vector<InterfaceCase>& cases,
                                   const LocationExtractor& extractor, const Geocoder& geocoder) {
  if (cases.empty()) throw Error(ErrorCode::InvalidInput, "no interface cases");
  InterfaceReport report;
  std::size_t correct = 0;
  std::size_t extracted = 0;
  std::size_t geocoded = 0;
  std::size_t errors = 0;
  for (const auto& c : cases) {
    InterfaceCaseOutcome o;
    o.query = c.query;
    try {
      o.extracted = extractor.extract(c.query).name;
      ++extracted;
      o.point = geocoder.geocode(*o.extracted);
      ++geocoded;
    } catch (const Error&) {
      // Counted below.
    }
    if (c.expected) {
      o.extraction_correct = o.extracted && lower(*o.extracted) == lower(*c.expected);
      const bool wrong_geocode = o.point && !o.extraction_correct;
      const bool failed = !o.point;
      o.erroneous = wrong_geocode || failed;
    } else {
      o.extraction_correct = !o.point;
      o.erroneous = o.point.has_value();
    }
    correct += o.extraction_correct ? 1 : 0;
    errors += o.erroneous ? 1 : 0;
    report.outcomes.push_back(std::move(o));
  }
  const auto total = static_cast<double>(cases.size());
  report.extraction_accuracy = static_cast<double>(correct) / total;
  report.geocoding_success_rate =
      extracted == 0 ? 0.0 : static_cast<double>(geocoded) / static_cast<double>(extracted);
  report.error_rate = static_cast<double>(errors) / total;
  return report;
}

std::vector<InterfaceCase> parse_interface_cases(std::string_view jsonl) {
  std::vector<InterfaceCase> cases;
  for_each_line(jsonl, [&](std::string_view line, std::size_t line_no) {
    try {
      const auto j = json::parse(line);
      InterfaceCase c;
      c.query = j.at("query").get<std::string>();
      if (j.contains("expected") && !j.at("expected").is_null()) {
        c.expected = j.at("expected").get<std::string>();
      }
      cases.push_back(std::move(c));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::FormatError, fmt::format("cases line {}: {}", line_no, e.what()));
    }
  });
  return cases;
}

std::vector<InterfaceCase> load_interface_cases(const std::filesystem::path& path) {
  return parse_interface_cases(slurp(path));
}

}  // namespace floodlense
