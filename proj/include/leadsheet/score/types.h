#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace leadsheet::score {

inline constexpr int kTicksPerQuarter = 24;
inline constexpr int kMinMelodyPitch = 55;  // G3
inline constexpr int kMaxMelodyPitch = 84;  // C6
inline constexpr int kMinBars = 4;
inline constexpr int kMaxBars = 32;

struct Pitch {
  int midi = 60;
  friend bool operator==(const Pitch&, const Pitch&) = default;
};

struct Duration {
  int ticks = kTicksPerQuarter;
  friend bool operator==(const Duration&, const Duration&) = default;
};

// whole, dotted-half, half, dotted-quarter, quarter-triplet (16), quarter,
// dotted-eighth, eighth, eighth-triplet (8), sixteenth; descending.
inline constexpr std::array<int, 10> kPermittedDurations = {96, 72, 48, 36, 24,
                                                            18, 16, 12, 8, 6};

bool is_permitted_duration(int ticks);

// The first eight values are the qualities that carry a valence. The rest are
// kept so that a normalized-but-unfiltered sheet can still describe what the
// source contained; filter_instance rejects them.
enum class ChordQuality {
  kMajor,
  kMinor,
  kDominantSeventh,
  kMajorSeventh,
  kMinorSeventh,
  kDominantNinth,
  kMinorNinth,
  kDiminished,
  kSuspendedFourth,
  kSeventhFlatNinth,
  kAddedNinth,
  kAugmented,
  kHalfDiminished,
  kDiminishedSeventh,
  kMajorSixth,
  kMinorSixth,
  kPower,
  kOther,
};

inline constexpr std::array<ChordQuality, 8> kPermittedQualities = {
    ChordQuality::kMajor,          ChordQuality::kMinor,
    ChordQuality::kDominantSeventh, ChordQuality::kMajorSeventh,
    ChordQuality::kMinorSeventh,   ChordQuality::kDominantNinth,
    ChordQuality::kMinorNinth,     ChordQuality::kDiminished};

bool is_permitted_quality(ChordQuality q);
std::string_view quality_name(ChordQuality q);    // "Major", "MinorSeventh", ...
std::string_view quality_suffix(ChordQuality q);  // "", "m", "7", "maj7", ...
std::optional<ChordQuality> quality_from_name(std::string_view name);

// Chord tones as semitone offsets above the root.
std::vector<int> chord_intervals(ChordQuality q);

std::string_view pitch_class_name(int pc);  // sharp spelling
std::optional<int> pitch_class_from_name(std::string_view name);

struct ChordSymbol {
  std::optional<int> root;  // pitch class 0-11; nullopt = Rest ("N.C.")
  ChordQuality quality = ChordQuality::kMajor;

  static ChordSymbol rest() { return {}; }
  static ChordSymbol of(int root_pc, ChordQuality q) { return {root_pc, q}; }

  bool is_rest() const { return !root.has_value(); }

  // "C", "F#m7", "Bbdim" (flats accepted on input), "N.C." for rest.
  std::string to_string() const;
  static std::optional<ChordSymbol> parse(std::string_view text);

  friend bool operator==(const ChordSymbol& a, const ChordSymbol& b) {
    if (a.is_rest() || b.is_rest()) return a.is_rest() == b.is_rest();
    return a.root == b.root && a.quality == b.quality;
  }
};

struct TimeSignature {
  int numerator = 4;
  int denominator = 4;

  int bar_ticks() const { return numerator * kTicksPerQuarter * 4 / denominator; }
  std::string to_string() const;
  static std::optional<TimeSignature> parse(std::string_view text);
  friend bool operator==(const TimeSignature&, const TimeSignature&) = default;
};

inline constexpr std::array<TimeSignature, 5> kPermittedTimeSignatures = {
    TimeSignature{4, 4}, TimeSignature{3, 4}, TimeSignature{2, 2},
    TimeSignature{2, 4}, TimeSignature{6, 8}};

bool is_permitted_time_signature(const TimeSignature& ts);

// Position of a bar inside its phrase.
enum class Grouping { kFirst1, kFirst2, kMiddle, kLast2, kLast1 };

inline constexpr std::array<Grouping, 5> kAllGroupings = {
    Grouping::kFirst1, Grouping::kFirst2, Grouping::kMiddle, Grouping::kLast2,
    Grouping::kLast1};

std::string_view grouping_name(Grouping g);  // "first1", "first2", "mid", ...
std::optional<Grouping> grouping_from_name(std::string_view name);

// Labels for a phrase of `length` bars: first bar first1, second first2,
// last bar last1, second-to-last last2, everything else mid. Earlier rules
// win when a short phrase makes them overlap.
std::vector<Grouping> phrase_grouping(int length);

struct Event {
  ChordSymbol chord;
  std::optional<Pitch> melody;  // nullopt = melody rest
  Duration duration;
  friend bool operator==(const Event&, const Event&) = default;
};

struct Bar {
  std::vector<Event> events;
  TimeSignature time_signature;
  Grouping grouping = Grouping::kMiddle;

  int filled_ticks() const;
  friend bool operator==(const Bar&, const Bar&) = default;
};

enum class KeyMode { kMajor, kMinor };  // normalized: C major or A minor

std::string_view key_name(KeyMode m);  // "C major" / "A minor"
std::optional<KeyMode> key_from_name(std::string_view name);

struct LeadSheet {
  std::vector<Bar> bars;
  KeyMode key = KeyMode::kMajor;
  std::string title;
  std::string source;

  std::size_t event_count() const;
  friend bool operator==(const LeadSheet&, const LeadSheet&) = default;
};

}  // namespace leadsheet::score
