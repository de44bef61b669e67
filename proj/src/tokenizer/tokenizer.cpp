#include "leadsheet/tokenizer/tokenizer.h"

#include <algorithm>

#include "leadsheet/error.h"

namespace leadsheet::tokenizer {

using score::LeadSheet;

namespace {

int require_token(const Vocabulary& vocab, const std::string& text) {
  auto id = vocab.find(text);
  if (!id) throw DataError("unknown token " + text);
  return *id;
}

const char* role_name(Role r) { return r == Role::kEncoder ? "encoder" : "decoder"; }

}  // namespace

ConditionTrack conditions_of(const LeadSheet& sheet, const affect::ChordValenceTable& table) {
  const auto valence = affect::bar_descriptors(sheet, table);
  ConditionTrack track;
  track.reserve(sheet.bars.size());
  for (std::size_t i = 0; i < sheet.bars.size(); ++i) {
    const auto& bar = sheet.bars[i];
    track.push_back({bar.time_signature, bar.grouping, valence[i],
                     density_bucket(static_cast<int>(bar.events.size()))});
  }
  return track;
}

TokenSequence encode_conditions(const ConditionTrack& track, const Vocabulary& vocab) {
  if (track.empty()) throw InvalidArgument("empty condition track");
  TokenSequence seq{Role::kEncoder, {}};
  seq.ids.reserve(5 * track.size() + 2);
  seq.ids.push_back(kStartId);
  for (const auto& c : track) {
    seq.ids.push_back(kBarId);
    seq.ids.push_back(require_token(vocab, time_signature_token(c.time_signature)));
    seq.ids.push_back(require_token(vocab, grouping_token(c.grouping)));
    seq.ids.push_back(require_token(vocab, valence_token(c.valence)));
    seq.ids.push_back(require_token(vocab, density_token(c.density)));
  }
  seq.ids.push_back(kEndId);
  return seq;
}

ConditionTrack decode_conditions(const TokenSequence& seq, const Vocabulary& vocab) {
  const auto& ids = seq.ids;
  if (ids.size() < 7 || (ids.size() - 2) % 5 != 0) {
    throw GrammarError("encoder sequence length must be 5n + 2", ids.size());
  }
  if (ids.front() != kStartId) throw GrammarError("expected <s>", 0);
  if (ids.back() != kEndId) throw GrammarError("expected </s>", ids.size() - 1);
  ConditionTrack track;
  for (std::size_t i = 1; i + 1 < ids.size(); i += 5) {
    if (ids[i] != kBarId) throw GrammarError("expected BAR", i);
    const TokenKind expect[4] = {TokenKind::kTimeSignature, TokenKind::kGrouping,
                                 TokenKind::kValence, TokenKind::kDensity};
    for (int k = 0; k < 4; ++k) {
      const int id = ids[i + 1 + k];
      if (id < 0 || static_cast<std::size_t>(id) >= vocab.size() || vocab.kind(id) != expect[k]) {
        throw GrammarError("unexpected encoder token", i + 1 + k);
      }
    }
    BarCondition c;
    c.time_signature = *score::TimeSignature::parse(vocab.text(ids[i + 1]).substr(3));
    c.grouping = *score::grouping_from_name(vocab.text(ids[i + 2]).substr(6));
    c.valence = *affect::descriptor_from_name(vocab.text(ids[i + 3]).substr(4));
    c.density = *density_from_name(vocab.text(ids[i + 4]).substr(5));
    track.push_back(c);
  }
  return track;
}

TokenSequence encode_leadsheet(const LeadSheet& sheet, const Vocabulary& vocab) {
  TokenSequence seq{Role::kDecoder, {}};
  seq.ids.reserve(2 + sheet.bars.size() + 3 * sheet.event_count());
  seq.ids.push_back(kStartId);
  for (const auto& bar : sheet.bars) {
    seq.ids.push_back(kBarId);
    for (const auto& e : bar.events) {
      auto c = vocab.chord_id(e.chord);
      if (!c) throw DataError("chord " + e.chord.to_string() + " is not in the vocabulary");
      auto m = vocab.melody_id(e.melody);
      if (!m) throw DataError(melody_token(e.melody) + " is not in the vocabulary");
      auto d = vocab.duration_id(e.duration.ticks);
      if (!d) throw DataError(duration_token(e.duration.ticks) + " is not in the vocabulary");
      seq.ids.push_back(*c);
      seq.ids.push_back(*m);
      seq.ids.push_back(*d);
    }
  }
  seq.ids.push_back(kEndId);
  return seq;
}

SheetInfo info_of(const LeadSheet& sheet) { return {sheet.key, sheet.title, sheet.source}; }

LeadSheet decode_tokens(const TokenSequence& seq, const ConditionTrack& track,
                        const Vocabulary& vocab, const SheetInfo& info) {
  const auto& ids = seq.ids;
  LeadSheet sheet;
  sheet.key = info.key;
  sheet.title = info.title;
  sheet.source = info.source;
  auto kind_at = [&](std::size_t i) {
    const int id = ids[i];
    if (id < 0 || static_cast<std::size_t>(id) >= vocab.size()) {
      throw GrammarError("token id out of range", i);
    }
    return vocab.kind(id);
  };
  if (ids.empty() || kind_at(0) != TokenKind::kStart) throw GrammarError("expected <s>", 0);

  auto close_bar = [&](std::size_t index) {
    if (sheet.bars.empty()) return;
    const auto& bar = sheet.bars.back();
    if (bar.events.empty()) throw GrammarError("bar without events", index);
    const int cap = bar.time_signature.bar_ticks();
    if (bar.filled_ticks() != cap) {
      throw CapacityError("bar " + std::to_string(sheet.bars.size()) + " holds " +
                              std::to_string(bar.filled_ticks()) + " of " +
                              std::to_string(cap) + " ticks",
                          sheet.bars.size() - 1);
    }
  };

  std::size_t i = 1;
  bool ended = false;
  while (i < ids.size()) {
    const TokenKind k = kind_at(i);
    if (k == TokenKind::kEnd) {
      close_bar(i);
      ended = true;
      ++i;
      break;
    }
    if (k == TokenKind::kBar) {
      close_bar(i);
      if (sheet.bars.size() >= track.size()) {
        throw GrammarError("more bars than conditions", i);
      }
      score::Bar bar;
      bar.time_signature = track[sheet.bars.size()].time_signature;
      bar.grouping = track[sheet.bars.size()].grouping;
      sheet.bars.push_back(std::move(bar));
      ++i;
      continue;
    }
    if (sheet.bars.empty()) throw GrammarError("expected BAR", i);
    if (k != TokenKind::kChord) throw GrammarError("expected chord token", i);
    if (i + 1 >= ids.size() || kind_at(i + 1) != TokenKind::kMelody) {
      throw GrammarError("expected melody token", i + 1);
    }
    if (i + 2 >= ids.size() || kind_at(i + 2) != TokenKind::kDuration) {
      throw GrammarError("expected duration token", i + 2);
    }
    score::Bar& bar = sheet.bars.back();
    score::Event e;
    e.chord = vocab.chord_of(ids[i]);
    e.melody = vocab.melody_of(ids[i + 1]);
    e.duration = score::Duration{vocab.ticks_of(ids[i + 2])};
    if (bar.filled_ticks() + e.duration.ticks > bar.time_signature.bar_ticks()) {
      throw CapacityError("bar " + std::to_string(sheet.bars.size()) + " overflows its " +
                              std::to_string(bar.time_signature.bar_ticks()) + " ticks",
                          sheet.bars.size() - 1);
    }
    bar.events.push_back(e);
    i += 3;
  }
  if (!ended) throw GrammarError("missing </s>", ids.size());
  if (i != ids.size()) throw GrammarError("tokens after </s>", i);
  if (sheet.bars.size() != track.size()) {
    throw GrammarError("stream has " + std::to_string(sheet.bars.size()) + " bars, conditions " +
                           std::to_string(track.size()),
                       ids.size() - 1);
  }
  return sheet;
}

nlohmann::json sequence_to_json(const TokenSequence& seq, const Vocabulary& vocab) {
  return {{"format", "leadsheet-tokens"},
          {"version", 1},
          {"role", role_name(seq.role)},
          {"vocab_hash", vocab.hash()},
          {"ids", seq.ids}};
}

TokenSequence sequence_from_json(const nlohmann::json& j, const Vocabulary& vocab) {
  if (!j.is_object() || j.value("format", "") != "leadsheet-tokens" || j.value("version", 0) != 1) {
    throw DataError("not a version-1 token stream");
  }
  if (j.value("vocab_hash", "") != vocab.hash()) {
    throw DataError("token stream was written with a different vocabulary");
  }
  TokenSequence seq;
  seq.role = j.value("role", "") == "encoder" ? Role::kEncoder : Role::kDecoder;
  seq.ids = j.at("ids").get<std::vector<int>>();
  for (int id : seq.ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab.size()) {
      throw DataError("token id " + std::to_string(id) + " outside the vocabulary");
    }
  }
  return seq;
}

DecoderGrammar::DecoderGrammar(const Vocabulary& vocab, std::vector<int> bar_capacities)
    : vocab_(&vocab), capacities_(std::move(bar_capacities)) {
  int max_cap = 0;
  for (int c : capacities_) max_cap = std::max(max_cap, c);
  std::vector<int> ticks;
  for (std::size_t id = 0; id < vocab.size(); ++id) {
    if (vocab.kind(static_cast<int>(id)) == TokenKind::kDuration) {
      durations_.push_back(static_cast<int>(id));
      ticks.push_back(vocab.ticks_of(static_cast<int>(id)));
    }
  }
  // min_events_[r]: fewest durations summing to exactly r ticks, -1 if none.
  min_events_.assign(static_cast<std::size_t>(max_cap) + 1, -1);
  min_events_[0] = 0;
  for (int r = 1; r <= max_cap; ++r) {
    for (int t : ticks) {
      if (t > r) continue;
      const int prev = min_events_[static_cast<std::size_t>(r - t)];
      int& best = min_events_[static_cast<std::size_t>(r)];
      if (prev >= 0 && (best < 0 || prev + 1 < best)) best = prev + 1;
    }
  }
  for (std::size_t b = 0; b < capacities_.size(); ++b) {
    if (capacities_[b] <= 0 || !fillable(capacities_[b])) {
      throw InvalidArgument("bar " + std::to_string(b + 1) + " capacity of " +
                            std::to_string(capacities_[b]) +
                            " ticks cannot be filled with the vocabulary's durations");
    }
  }
}

bool DecoderGrammar::fillable(int ticks) const {
  return ticks >= 0 && static_cast<std::size_t>(ticks) < min_events_.size() &&
         min_events_[static_cast<std::size_t>(ticks)] >= 0;
}

std::size_t DecoderGrammar::tokens_to_finish(std::size_t from_bar) const {
  std::size_t n = 1;  // </s>
  for (std::size_t b = from_bar; b < capacities_.size(); ++b) {
    n += 1 + 3 * static_cast<std::size_t>(min_events_[static_cast<std::size_t>(capacities_[b])]);
  }
  return n;
}

std::size_t DecoderGrammar::min_total_tokens() const { return tokens_to_finish(0); }

void DecoderGrammar::set_token_budget(std::size_t tokens) {
  if (steps_ != 0) throw InvalidArgument("token budget must be set before the first token");
  if (tokens < min_total_tokens()) {
    throw InvalidArgument("token budget of " + std::to_string(tokens) + " is below the " +
                          std::to_string(min_total_tokens()) + " tokens the bars need");
  }
  budget_ = tokens;
  finish_.clear();
  for (std::size_t b = 0; b <= capacities_.size(); ++b) finish_.push_back(tokens_to_finish(b));
}

bool DecoderGrammar::allows(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= vocab_->size()) return false;
  const TokenKind k = vocab_->kind(id);
  switch (phase_) {
    case Phase::kBarOrEnd:
      return bar_ < static_cast<int>(capacities_.size()) ? k == TokenKind::kBar
                                                          : k == TokenKind::kEnd;
    case Phase::kChord: return k == TokenKind::kChord;
    case Phase::kMelody: return k == TokenKind::kMelody;
    case Phase::kDuration: {
      if (k != TokenKind::kDuration) return false;
      const int t = vocab_->ticks_of(id);
      if (t > remaining_ || !fillable(remaining_ - t)) return false;
      if (!budget_) return true;
      // This token, the rest of the bar at its shortest, then the later bars.
      const std::size_t after =
          steps_ + 1 +
          3 * static_cast<std::size_t>(min_events_[static_cast<std::size_t>(remaining_ - t)]) +
          finish_[static_cast<std::size_t>(bar_)];
      return after <= *budget_;
    }
    case Phase::kDone: return false;
  }
  return false;
}

void DecoderGrammar::allowed(std::span<unsigned char> out) const {
  for (std::size_t id = 0; id < out.size(); ++id) {
    out[id] = allows(static_cast<int>(id)) ? 1 : 0;
  }
}

void DecoderGrammar::advance(int id) {
  if (!allows(id)) throw GrammarError("token not allowed by the decoder grammar", steps_);
  ++steps_;
  switch (phase_) {
    case Phase::kBarOrEnd:
      if (vocab_->kind(id) == TokenKind::kEnd) {
        phase_ = Phase::kDone;
      } else {
        remaining_ = capacities_[static_cast<std::size_t>(bar_)];
        ++bar_;
        phase_ = Phase::kChord;
      }
      break;
    case Phase::kChord: phase_ = Phase::kMelody; break;
    case Phase::kMelody: phase_ = Phase::kDuration; break;
    case Phase::kDuration:
      remaining_ -= vocab_->ticks_of(id);
      phase_ = remaining_ == 0 ? Phase::kBarOrEnd : Phase::kChord;
      break;
    case Phase::kDone: break;
  }
}

}  // namespace leadsheet::tokenizer
