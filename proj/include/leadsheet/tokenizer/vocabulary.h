#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "leadsheet/affect/valence.h"
#include "leadsheet/score/types.h"

namespace leadsheet::tokenizer {

enum class TokenKind {
  kPad,
  kStart,
  kEnd,
  kBar,
  kTimeSignature,
  kGrouping,
  kValence,
  kDensity,
  kChord,
  kMelody,
  kDuration,
};

enum class Density { kLow, kMedium, kHigh };

inline constexpr std::array<Density, 3> kAllDensities = {Density::kLow, Density::kMedium,
                                                         Density::kHigh};

std::string_view density_name(Density d);  // "low", "medium", "high"
std::optional<Density> density_from_name(std::string_view name);

// Event count per bar -> level: 0-2 low, 3-5 medium, 6+ high.
Density density_bucket(int event_count);

inline constexpr int kPadId = 0;
inline constexpr int kStartId = 1;
inline constexpr int kEndId = 2;
inline constexpr int kBarId = 3;

// Dense token <-> id table. Ids 0..3 are always <pad>, <s>, </s>, BAR; the
// rest follow a canonical order so that the same token set always gets the
// same ids.
class Vocabulary {
 public:
  // Fixed encoder inventory: specials, 5 meters, 5 groupings, 5 valence
  // descriptors, 3 density levels.
  static Vocabulary encoder();
  // Every chord (12 roots x 8 qualities + rest), melody 55..84 + rest and all
  // permitted durations.
  static Vocabulary decoder_full();
  // Only the chord/melody/duration tokens that occur in the corpus.
  static Vocabulary decoder_from_corpus(std::span<const score::LeadSheet> corpus);

  static Vocabulary from_json(const nlohmann::json& j);  // throws DataError
  nlohmann::json to_json() const;

  std::size_t size() const { return tokens_.size(); }
  std::optional<int> find(std::string_view text) const;
  const std::string& text(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  TokenKind kind(int id) const { return kinds_.at(static_cast<std::size_t>(id)); }
  std::span<const std::string> tokens() const { return tokens_; }

  // FNV-1a over the token list in id order, as 16 hex digits.
  const std::string& hash() const { return hash_; }

  // Decoder payloads.
  std::optional<int> chord_id(const score::ChordSymbol& c) const;
  std::optional<int> melody_id(const std::optional<score::Pitch>& p) const;
  std::optional<int> duration_id(int ticks) const;
  score::ChordSymbol chord_of(int id) const;
  std::optional<score::Pitch> melody_of(int id) const;
  int ticks_of(int id) const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  explicit Vocabulary(std::vector<std::string> tokens);

  std::vector<std::string> tokens_;
  std::vector<TokenKind> kinds_;
  std::vector<int> payload_;  // duration ticks, MIDI (-1 rest), chord index
  std::unordered_map<std::string, int> index_;
  std::string hash_;
};

// Token text helpers shared by encoder and decoder inventories.
std::string time_signature_token(const score::TimeSignature& ts);
std::string grouping_token(score::Grouping g);
std::string valence_token(affect::ValenceDescriptor d);
std::string density_token(Density d);
std::string chord_token(const score::ChordSymbol& c);
std::string melody_token(const std::optional<score::Pitch>& p);
std::string duration_token(int ticks);

}  // namespace leadsheet::tokenizer
