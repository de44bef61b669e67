#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "leadsheet/affect/valence.h"
#include "leadsheet/score/types.h"
#include "leadsheet/tokenizer/vocabulary.h"

namespace leadsheet::tokenizer {

// Per-bar condition 4-tuple fed to the encoder.
struct BarCondition {
  score::TimeSignature time_signature;
  score::Grouping grouping = score::Grouping::kMiddle;
  affect::ValenceDescriptor valence = affect::ValenceDescriptor::kNeutral;
  Density density = Density::kMedium;
  friend bool operator==(const BarCondition&, const BarCondition&) = default;
};

using ConditionTrack = std::vector<BarCondition>;

enum class Role { kEncoder, kDecoder };

struct TokenSequence {
  Role role = Role::kDecoder;
  std::vector<int> ids;
  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

ConditionTrack conditions_of(const score::LeadSheet& sheet,
                             const affect::ChordValenceTable& table =
                                 affect::ChordValenceTable::builtin());

// [<s>, (BAR, ts, group, val, dens) x n, </s>]; length 5n + 2.
TokenSequence encode_conditions(const ConditionTrack& track, const Vocabulary& vocab);
ConditionTrack decode_conditions(const TokenSequence& seq, const Vocabulary& vocab);

// [<s>, (BAR, (chord, melody, duration) x e_i) x n, </s>]; length 2 + n + 3E.
// Throws DataError for out-of-vocabulary chords, pitches or durations.
TokenSequence encode_leadsheet(const score::LeadSheet& sheet, const Vocabulary& vocab);

// What the token stream does not carry.
struct SheetInfo {
  score::KeyMode key = score::KeyMode::kMajor;
  std::string title;
  std::string source;
};

SheetInfo info_of(const score::LeadSheet& sheet);

// Inverse of encode_leadsheet. Time signatures and grouping come from the
// condition track. Throws GrammarError (with token index) when the stream
// breaks START (BAR (CHORD MELODY DURATION)+)+ END or the bar count differs
// from the track, and CapacityError when a bar over- or under-fills.
score::LeadSheet decode_tokens(const TokenSequence& seq, const ConditionTrack& track,
                               const Vocabulary& vocab, const SheetInfo& info = {});

nlohmann::json sequence_to_json(const TokenSequence& seq, const Vocabulary& vocab);
TokenSequence sequence_from_json(const nlohmann::json& j, const Vocabulary& vocab);

// Incremental form of the decoder grammar, used to mask sampling. Beyond the
// plain grammar it only admits durations that leave a remainder the
// vocabulary's durations can still fill exactly, so a bar can always be
// completed.
class DecoderGrammar {
 public:
  // Throws InvalidArgument when some bar capacity cannot be filled with the
  // vocabulary's durations.
  DecoderGrammar(const Vocabulary& vocab, std::vector<int> bar_capacities);

  // Limits the tokens this grammar will accept (BAR through </s>). Durations
  // are then masked unless the piece can still end within the budget. Throws
  // InvalidArgument when even the shortest completion does not fit.
  void set_token_budget(std::size_t tokens);
  // Fewest tokens (BAR through </s>) that complete all bars.
  std::size_t min_total_tokens() const;

  bool allows(int id) const;
  // Writes 1 for allowed ids and 0 otherwise; out.size() == vocab.size().
  void allowed(std::span<unsigned char> out) const;
  void advance(int id);  // throws GrammarError if not allowed
  bool done() const { return phase_ == Phase::kDone; }
  int bar_index() const { return bar_; }
  int remaining_ticks() const { return remaining_; }
  std::size_t steps() const { return steps_; }

 private:
  enum class Phase { kBarOrEnd, kChord, kMelody, kDuration, kDone };

  bool fillable(int ticks) const;
  std::size_t tokens_to_finish(std::size_t from_bar) const;

  const Vocabulary* vocab_;
  std::vector<int> capacities_;
  std::vector<int> durations_;   // (id, ticks) flattened as ids
  std::vector<int> min_events_;  // fewest durations filling r ticks, -1 if none
  std::optional<std::size_t> budget_;
  std::vector<std::size_t> finish_;  // tokens_to_finish(b) under a budget
  Phase phase_ = Phase::kBarOrEnd;
  int bar_ = 0;  // bars opened so far
  int remaining_ = 0;
  std::size_t steps_ = 0;
};

}  // namespace leadsheet::tokenizer
