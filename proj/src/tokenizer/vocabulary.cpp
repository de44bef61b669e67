#include "leadsheet/tokenizer/vocabulary.h"

#include <algorithm>
#include <set>

#include "leadsheet/error.h"
#include "leadsheet/hash.h"

namespace leadsheet::tokenizer {

using score::ChordSymbol;

namespace {

constexpr std::string_view kPad = "<pad>";
constexpr std::string_view kStart = "<s>";
constexpr std::string_view kEnd = "</s>";
constexpr std::string_view kBar = "BAR";

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

int encode_chord(const ChordSymbol& c) {
  return c.is_rest() ? -1 : *c.root * 32 + static_cast<int>(c.quality);
}

ChordSymbol decode_chord(int payload) {
  if (payload < 0) return ChordSymbol::rest();
  return ChordSymbol::of(payload / 32, static_cast<score::ChordQuality>(payload % 32));
}

std::vector<std::string> with_specials(std::vector<std::string> body) {
  std::vector<std::string> out = {std::string(kPad), std::string(kStart), std::string(kEnd),
                                  std::string(kBar)};
  out.insert(out.end(), std::make_move_iterator(body.begin()),
             std::make_move_iterator(body.end()));
  return out;
}

}  // namespace

std::string_view density_name(Density d) {
  switch (d) {
    case Density::kLow: return "low";
    case Density::kMedium: return "medium";
    case Density::kHigh: return "high";
  }
  return "low";
}

std::optional<Density> density_from_name(std::string_view name) {
  for (auto d : kAllDensities) {
    if (density_name(d) == name) return d;
  }
  return std::nullopt;
}

Density density_bucket(int event_count) {
  if (event_count < 0) throw InvalidArgument("negative event count");
  if (event_count <= 2) return Density::kLow;
  if (event_count <= 5) return Density::kMedium;
  return Density::kHigh;
}

std::string time_signature_token(const score::TimeSignature& ts) { return "ts:" + ts.to_string(); }
std::string grouping_token(score::Grouping g) {
  return "group:" + std::string(score::grouping_name(g));
}
std::string valence_token(affect::ValenceDescriptor d) {
  return "val:" + std::string(affect::descriptor_name(d));
}
std::string density_token(Density d) { return "dens:" + std::string(density_name(d)); }
std::string chord_token(const ChordSymbol& c) { return "chord:" + c.to_string(); }
std::string melody_token(const std::optional<score::Pitch>& p) {
  return p ? "mel:" + std::to_string(p->midi) : std::string("mel:rest");
}
std::string duration_token(int ticks) { return "dur:" + std::to_string(ticks); }

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  std::string joined;
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    const std::string& t = tokens_[i];
    if (!index_.emplace(t, static_cast<int>(i)).second) {
      throw DataError("vocabulary: duplicate token " + t);
    }
    TokenKind kind;
    int payload = 0;
    if (t == kPad) {
      kind = TokenKind::kPad;
    } else if (t == kStart) {
      kind = TokenKind::kStart;
    } else if (t == kEnd) {
      kind = TokenKind::kEnd;
    } else if (t == kBar) {
      kind = TokenKind::kBar;
    } else if (starts_with(t, "ts:")) {
      kind = TokenKind::kTimeSignature;
      if (!score::TimeSignature::parse(t.substr(3))) throw DataError("vocabulary: bad token " + t);
    } else if (starts_with(t, "group:")) {
      kind = TokenKind::kGrouping;
      if (!score::grouping_from_name(t.substr(6))) throw DataError("vocabulary: bad token " + t);
    } else if (starts_with(t, "val:")) {
      kind = TokenKind::kValence;
      if (!affect::descriptor_from_name(t.substr(4))) throw DataError("vocabulary: bad token " + t);
    } else if (starts_with(t, "dens:")) {
      kind = TokenKind::kDensity;
      if (!density_from_name(t.substr(5))) throw DataError("vocabulary: bad token " + t);
    } else if (starts_with(t, "chord:")) {
      kind = TokenKind::kChord;
      auto c = ChordSymbol::parse(t.substr(6));
      if (!c) throw DataError("vocabulary: bad token " + t);
      payload = encode_chord(*c);
    } else if (starts_with(t, "mel:")) {
      kind = TokenKind::kMelody;
      if (t == "mel:rest") {
        payload = -1;
      } else {
        payload = std::stoi(t.substr(4));
      }
    } else if (starts_with(t, "dur:")) {
      kind = TokenKind::kDuration;
      payload = std::stoi(t.substr(4));
      if (payload <= 0) throw DataError("vocabulary: bad token " + t);
    } else {
      throw DataError("vocabulary: unknown token " + t);
    }
    kinds_.push_back(kind);
    payload_.push_back(payload);
    joined += t;
    joined += '\n';
  }
  if (tokens_.size() < 4 || tokens_[kPadId] != kPad || tokens_[kStartId] != kStart ||
      tokens_[kEndId] != kEnd || tokens_[kBarId] != kBar) {
    throw DataError("vocabulary: ids 0-3 must be <pad> <s> </s> BAR");
  }
  hash_ = hex64(fnv1a64(joined));
}

Vocabulary Vocabulary::encoder() {
  std::vector<std::string> body;
  for (const auto& ts : score::kPermittedTimeSignatures) body.push_back(time_signature_token(ts));
  for (auto g : score::kAllGroupings) body.push_back(grouping_token(g));
  for (auto d : affect::kAllDescriptors) body.push_back(valence_token(d));
  for (auto d : kAllDensities) body.push_back(density_token(d));
  return Vocabulary(with_specials(std::move(body)));
}

namespace {

struct DecoderTokenSet {
  std::set<int> chords;     // encode_chord payloads
  std::set<int> melodies;   // -1 = rest
  std::set<int> durations;

  std::vector<std::string> ordered() const {
    std::vector<std::string> out;
    for (int c : chords) out.push_back(chord_token(decode_chord(c)));
    for (int m : melodies) {
      out.push_back(m < 0 ? melody_token(std::nullopt) : melody_token(score::Pitch{m}));
    }
    for (int d : durations) out.push_back(duration_token(d));
    return out;
  }
};

}  // namespace

Vocabulary Vocabulary::decoder_full() {
  DecoderTokenSet set;
  set.chords.insert(-1);
  for (int root = 0; root < 12; ++root) {
    for (auto q : score::kPermittedQualities) set.chords.insert(encode_chord(ChordSymbol::of(root, q)));
  }
  set.melodies.insert(-1);
  for (int p = score::kMinMelodyPitch; p <= score::kMaxMelodyPitch; ++p) set.melodies.insert(p);
  for (int d : score::kPermittedDurations) set.durations.insert(d);
  return Vocabulary(with_specials(set.ordered()));
}

Vocabulary Vocabulary::decoder_from_corpus(std::span<const score::LeadSheet> corpus) {
  DecoderTokenSet set;
  for (const auto& sheet : corpus) {
    for (const auto& bar : sheet.bars) {
      for (const auto& e : bar.events) {
        set.chords.insert(encode_chord(e.chord));
        set.melodies.insert(e.melody ? e.melody->midi : -1);
        set.durations.insert(e.duration.ticks);
      }
    }
  }
  return Vocabulary(with_specials(set.ordered()));
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("format", "") != "leadsheet-vocab" || j.value("version", 0) != 1 ||
      !j.contains("tokens") || !j.at("tokens").is_array()) {
    throw DataError("not a version-1 leadsheet vocabulary");
  }
  Vocabulary v(j.at("tokens").get<std::vector<std::string>>());
  if (j.contains("hash") && j.at("hash") != v.hash()) {
    throw DataError("vocabulary hash mismatch: file says " + j.at("hash").get<std::string>() +
                    ", tokens hash to " + v.hash());
  }
  return v;
}

nlohmann::json Vocabulary::to_json() const {
  return {{"format", "leadsheet-vocab"}, {"version", 1}, {"hash", hash_}, {"tokens", tokens_}};
}

std::optional<int> Vocabulary::find(std::string_view text) const {
  auto it = index_.find(std::string(text));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> Vocabulary::chord_id(const ChordSymbol& c) const { return find(chord_token(c)); }
std::optional<int> Vocabulary::melody_id(const std::optional<score::Pitch>& p) const {
  return find(melody_token(p));
}
std::optional<int> Vocabulary::duration_id(int ticks) const { return find(duration_token(ticks)); }

ChordSymbol Vocabulary::chord_of(int id) const {
  if (kind(id) != TokenKind::kChord) throw InvalidArgument("token " + text(id) + " is not a chord");
  return decode_chord(payload_[static_cast<std::size_t>(id)]);
}

std::optional<score::Pitch> Vocabulary::melody_of(int id) const {
  if (kind(id) != TokenKind::kMelody) throw InvalidArgument("token " + text(id) + " is not a pitch");
  const int p = payload_[static_cast<std::size_t>(id)];
  if (p < 0) return std::nullopt;
  return score::Pitch{p};
}

int Vocabulary::ticks_of(int id) const {
  if (kind(id) != TokenKind::kDuration) {
    throw InvalidArgument("token " + text(id) + " is not a duration");
  }
  return payload_[static_cast<std::size_t>(id)];
}

}  // namespace leadsheet::tokenizer
