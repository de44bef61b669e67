#include "leadsheet/score/types.h"

#include <algorithm>
#include <charconv>

namespace leadsheet::score {

namespace {

struct QualityInfo {
  ChordQuality quality;
  std::string_view name;
  std::string_view suffix;
};

constexpr std::array<QualityInfo, 18> kQualityInfo = {{
    {ChordQuality::kMajor, "Major", ""},
    {ChordQuality::kMinor, "Minor", "m"},
    {ChordQuality::kDominantSeventh, "DominantSeventh", "7"},
    {ChordQuality::kMajorSeventh, "MajorSeventh", "maj7"},
    {ChordQuality::kMinorSeventh, "MinorSeventh", "m7"},
    {ChordQuality::kDominantNinth, "DominantNinth", "9"},
    {ChordQuality::kMinorNinth, "MinorNinth", "m9"},
    {ChordQuality::kDiminished, "Diminished", "dim"},
    {ChordQuality::kSuspendedFourth, "SuspendedFourth", "sus4"},
    {ChordQuality::kSeventhFlatNinth, "SeventhFlatNinth", "7b9"},
    {ChordQuality::kAddedNinth, "AddedNinth", "add9"},
    {ChordQuality::kAugmented, "Augmented", "aug"},
    {ChordQuality::kHalfDiminished, "HalfDiminished", "m7b5"},
    {ChordQuality::kDiminishedSeventh, "DiminishedSeventh", "dim7"},
    {ChordQuality::kMajorSixth, "MajorSixth", "6"},
    {ChordQuality::kMinorSixth, "MinorSixth", "m6"},
    {ChordQuality::kPower, "Power", "5"},
    {ChordQuality::kOther, "Other", "?"},
}};

const QualityInfo& info(ChordQuality q) {
  return kQualityInfo[static_cast<std::size_t>(q)];
}

constexpr std::array<std::string_view, 12> kSharpNames = {
    "C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"};

constexpr std::string_view kRestChord = "N.C.";

}  // namespace

bool is_permitted_duration(int ticks) {
  return std::find(kPermittedDurations.begin(), kPermittedDurations.end(), ticks) !=
         kPermittedDurations.end();
}

bool is_permitted_quality(ChordQuality q) {
  return std::find(kPermittedQualities.begin(), kPermittedQualities.end(), q) !=
         kPermittedQualities.end();
}

std::string_view quality_name(ChordQuality q) { return info(q).name; }
std::string_view quality_suffix(ChordQuality q) { return info(q).suffix; }

std::optional<ChordQuality> quality_from_name(std::string_view name) {
  for (const auto& qi : kQualityInfo) {
    if (qi.name == name) return qi.quality;
  }
  return std::nullopt;
}

std::vector<int> chord_intervals(ChordQuality q) {
  switch (q) {
    case ChordQuality::kMajor: return {0, 4, 7};
    case ChordQuality::kMinor: return {0, 3, 7};
    case ChordQuality::kDominantSeventh: return {0, 4, 7, 10};
    case ChordQuality::kMajorSeventh: return {0, 4, 7, 11};
    case ChordQuality::kMinorSeventh: return {0, 3, 7, 10};
    case ChordQuality::kDominantNinth: return {0, 4, 7, 10, 14};
    case ChordQuality::kMinorNinth: return {0, 3, 7, 10, 14};
    case ChordQuality::kDiminished: return {0, 3, 6};
    case ChordQuality::kSuspendedFourth: return {0, 5, 7};
    case ChordQuality::kSeventhFlatNinth: return {0, 4, 7, 10, 13};
    case ChordQuality::kAddedNinth: return {0, 4, 7, 14};
    case ChordQuality::kAugmented: return {0, 4, 8};
    case ChordQuality::kHalfDiminished: return {0, 3, 6, 10};
    case ChordQuality::kDiminishedSeventh: return {0, 3, 6, 9};
    case ChordQuality::kMajorSixth: return {0, 4, 7, 9};
    case ChordQuality::kMinorSixth: return {0, 3, 7, 9};
    case ChordQuality::kPower: return {0, 7};
    case ChordQuality::kOther: return {0};
  }
  return {0};
}

std::string_view pitch_class_name(int pc) { return kSharpNames[((pc % 12) + 12) % 12]; }

std::optional<int> pitch_class_from_name(std::string_view name) {
  if (name.empty()) return std::nullopt;
  static constexpr std::array<int, 7> kLetterPc = {9, 11, 0, 2, 4, 5, 7};  // A..G
  const char letter = name[0];
  if (letter < 'A' || letter > 'G') return std::nullopt;
  int pc = kLetterPc[letter - 'A'];
  for (char c : name.substr(1)) {
    if (c == '#') {
      ++pc;
    } else if (c == 'b') {
      --pc;
    } else {
      return std::nullopt;
    }
  }
  return ((pc % 12) + 12) % 12;
}

std::string ChordSymbol::to_string() const {
  if (is_rest()) return std::string(kRestChord);
  std::string s(pitch_class_name(*root));
  s += quality_suffix(quality);
  return s;
}

std::optional<ChordSymbol> ChordSymbol::parse(std::string_view text) {
  if (text == kRestChord) return rest();
  if (text.empty()) return std::nullopt;
  std::size_t root_len = 1;
  while (root_len < text.size() && (text[root_len] == '#' || text[root_len] == 'b') &&
         root_len < 3) {
    // "Bb" is a root, but "Cb9"-style ambiguity does not arise: no suffix
    // starts with 'b'.
    ++root_len;
  }
  auto pc = pitch_class_from_name(text.substr(0, root_len));
  if (!pc) return std::nullopt;
  const std::string_view suffix = text.substr(root_len);
  for (const auto& qi : kQualityInfo) {
    if (qi.suffix == suffix) return of(*pc, qi.quality);
  }
  return std::nullopt;
}

std::string TimeSignature::to_string() const {
  return std::to_string(numerator) + "/" + std::to_string(denominator);
}

std::optional<TimeSignature> TimeSignature::parse(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return std::nullopt;
  TimeSignature ts;
  auto a = std::from_chars(text.data(), text.data() + slash, ts.numerator);
  auto b = std::from_chars(text.data() + slash + 1, text.data() + text.size(),
                           ts.denominator);
  if (a.ec != std::errc() || a.ptr != text.data() + slash || b.ec != std::errc() ||
      b.ptr != text.data() + text.size()) {
    return std::nullopt;
  }
  if (ts.numerator <= 0 || ts.denominator <= 0) return std::nullopt;
  return ts;
}

bool is_permitted_time_signature(const TimeSignature& ts) {
  return std::find(kPermittedTimeSignatures.begin(), kPermittedTimeSignatures.end(),
                   ts) != kPermittedTimeSignatures.end();
}

std::string_view grouping_name(Grouping g) {
  switch (g) {
    case Grouping::kFirst1: return "first1";
    case Grouping::kFirst2: return "first2";
    case Grouping::kMiddle: return "mid";
    case Grouping::kLast2: return "last2";
    case Grouping::kLast1: return "last1";
  }
  return "mid";
}

std::optional<Grouping> grouping_from_name(std::string_view name) {
  for (Grouping g : kAllGroupings) {
    if (grouping_name(g) == name) return g;
  }
  return std::nullopt;
}

std::vector<Grouping> phrase_grouping(int length) {
  std::vector<Grouping> out;
  out.reserve(std::max(length, 0));
  for (int i = 0; i < length; ++i) {
    if (i == 0) {
      out.push_back(Grouping::kFirst1);
    } else if (i == length - 1) {
      out.push_back(Grouping::kLast1);
    } else if (i == 1) {
      out.push_back(Grouping::kFirst2);
    } else if (i == length - 2) {
      out.push_back(Grouping::kLast2);
    } else {
      out.push_back(Grouping::kMiddle);
    }
  }
  return out;
}

int Bar::filled_ticks() const {
  int total = 0;
  for (const auto& e : events) total += e.duration.ticks;
  return total;
}

std::string_view key_name(KeyMode m) {
  return m == KeyMode::kMajor ? "C major" : "A minor";
}

std::optional<KeyMode> key_from_name(std::string_view name) {
  if (name == "C major") return KeyMode::kMajor;
  if (name == "A minor") return KeyMode::kMinor;
  return std::nullopt;
}

std::size_t LeadSheet::event_count() const {
  std::size_t n = 0;
  for (const auto& b : bars) n += b.events.size();
  return n;
}

}  // namespace leadsheet::score
