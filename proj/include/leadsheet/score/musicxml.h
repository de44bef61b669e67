#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "leadsheet/score/types.h"

namespace leadsheet::score {

struct RawNote {
  int onset = 0;     // ticks from the start of the measure
  int duration = 0;  // ticks
  std::optional<int> midi;  // nullopt = notated rest
  bool tie_start = false;
  bool tie_stop = false;
  int voice = 1;
};

struct RawHarmony {
  int onset = 0;
  ChordSymbol chord;  // root stripped of its bass note (inversions removed)
  std::string label;  // as notated, e.g. "C7b9"
  bool usable() const { return chord.is_rest() || is_permitted_quality(chord.quality); }
};

struct KeySignature {
  int fifths = 0;
  std::optional<KeyMode> mode;  // nullopt until detected

  // Pitch class of the tonic; requires a resolved mode.
  int tonic() const;
  friend bool operator==(const KeySignature&, const KeySignature&) = default;
};

struct RawMeasure {
  std::string number;
  TimeSignature time_signature;  // effective
  KeySignature key;              // effective
  int key_segment = 0;           // increments at every key change
  bool implicit = false;         // pickup measure
  bool repeat_forward = false;
  bool repeat_backward = false;
  int repeat_times = 2;
  std::vector<int> endings;      // volta numbers this measure belongs to
  bool phrase_start = false;     // rehearsal mark
  bool phrase_end = false;       // double or final barline
  bool off_grid = false;         // a duration was not a whole number of ticks
  int content_ticks = 0;         // furthest position reached by notes/rests
  std::vector<RawNote> notes;
  std::vector<RawHarmony> harmonies;
};

// One part of a partwise MusicXML document, in document order, before any
// normalization.
struct RawScore {
  std::string title;
  std::vector<RawMeasure> measures;

  int key_segment_count() const;
};

// Parses partwise MusicXML. The first part carrying chord symbols is used as
// the lead sheet. Throws ParseError on malformed XML and UnusableSourceError
// when there are no chord symbols or no melody notes. Segments without a
// notated mode get one inferred from tonic-chord frequency.
RawScore parse_musicxml(std::string_view document);
RawScore read_musicxml_file(const std::string& path);

// Partwise MusicXML for a lead sheet: divisions of 24, one <harmony> per chord
// change, double barlines at phrase ends.
std::string write_musicxml(const LeadSheet& sheet);

}  // namespace leadsheet::score
