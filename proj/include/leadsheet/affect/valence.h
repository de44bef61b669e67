#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "leadsheet/score/types.h"

namespace leadsheet::affect {

// A mood tag placed on the valence/arousal circumplex. Arousal is kept when
// the source gives it but nothing downstream reads it.
struct EmotionTag {
  std::string name;
  std::optional<double> valence;  // nullopt when the coordinate is not published
  std::optional<double> arousal;
};

struct ChordValenceEntry {
  score::ChordQuality quality;
  std::vector<std::string> described_as;  // descriptors attributed to the chord type
  std::vector<EmotionTag> cleaned_tags;   // after synonym matching / removal
  double valence = 0.0;
};

// Chord quality -> valence. Holds exactly the eight permitted qualities.
class ChordValenceTable {
 public:
  // The curated constants shipped with the library.
  static const ChordValenceTable& builtin();

  // Human-editable JSON file (see data/chord_valence.json). Throws DataError
  // when a permitted quality is missing, a value leaves [-1, 1], or an entry
  // whose tags all carry valences disagrees with their median.
  static ChordValenceTable from_file(const std::string& path);
  static ChordValenceTable from_json_text(std::string_view text);

  // Throws UnsupportedChordError naming the quality if it has no valence.
  double valence(score::ChordQuality q) const;
  const ChordValenceEntry& entry(score::ChordQuality q) const;
  std::span<const ChordValenceEntry> entries() const { return entries_; }

 private:
  std::vector<ChordValenceEntry> entries_;
};

enum class ValenceDescriptor { kLow, kModerateLow, kNeutral, kModerateHigh, kHigh };

inline constexpr std::array<ValenceDescriptor, 5> kAllDescriptors = {
    ValenceDescriptor::kLow, ValenceDescriptor::kModerateLow, ValenceDescriptor::kNeutral,
    ValenceDescriptor::kModerateHigh, ValenceDescriptor::kHigh};

std::string_view descriptor_name(ValenceDescriptor d);  // "Low", "ModerateLow", ...
std::optional<ValenceDescriptor> descriptor_from_name(std::string_view name);

double valence_of_quality(score::ChordQuality q,
                          const ChordValenceTable& table = ChordValenceTable::builtin());

// Median; mean of the two central values for even counts. Throws
// InvalidArgument on an empty list.
double median_valence(std::span<const double> values);

// Median over the bar's non-rest chord events, one sample per event;
// nullopt when every chord is a rest.
std::optional<double> bar_valence(const score::Bar& bar,
                                  const ChordValenceTable& table = ChordValenceTable::builtin());

// Five equal bins of width 0.4 over [-1, 1], left-closed, top bin closed.
ValenceDescriptor discretize(double v);

// Descriptor per bar; all-rest bars repeat the previous descriptor and the
// first one falls back to Neutral.
std::vector<ValenceDescriptor> bar_descriptors(
    const score::LeadSheet& sheet,
    const ChordValenceTable& table = ChordValenceTable::builtin());

struct PieceValence {
  double value = 0.0;
  ValenceDescriptor descriptor = ValenceDescriptor::kNeutral;
};

// Mean of the defined bar valences. Throws InvalidArgument for all-rest harmony.
PieceValence piece_valence(const score::LeadSheet& sheet,
                           const ChordValenceTable& table = ChordValenceTable::builtin());

}  // namespace leadsheet::affect
