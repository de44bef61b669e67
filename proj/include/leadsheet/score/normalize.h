#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "leadsheet/score/musicxml.h"
#include "leadsheet/score/types.h"

namespace leadsheet::score {

// Shifts every key segment so major segments sit in C and minor segments in
// A. Of the two candidate shifts (down d or up 12-d semitones) the one that
// brings the segment's mean melody pitch closest to the middle of the
// G3..C6 window wins; ties go down. Throws DataError if a note would leave
// MIDI 0..127.
RawScore transpose_to_c(const RawScore& score);

// Why an instance was dropped before it became a training example.
struct DiscardNote {
  int key_segment = 0;
  int bars = 0;
  std::string reason;
};

struct UnfoldResult {
  std::vector<LeadSheet> sheets;
  std::vector<DiscardNote> discarded;
};

// Plays repeats through (voltas honoured), reduces the melody to its top
// voice, merges ties inside a bar and ignores ties across bars, splits at key
// changes and truncates each instance at 32 bars. Instances shorter than
// 4 bars are reported in `discarded`. Chord changes inside a note split it
// into separate events. Grouping labels come from rehearsal marks and
// double barlines, or 8-bar phrases when an instance has none.
UnfoldResult unfold_and_split(const RawScore& score);

enum class RejectReason {
  kBarCount,
  kTimeSignature,
  kChordQuality,
  kDuration,
  kMelodyRange,
  kBarCapacity,
};

std::string_view reject_reason_name(RejectReason r);  // "chord quality", ...

struct Rejection {
  RejectReason reason;
  std::string detail;
};

using FilterResult = std::variant<LeadSheet, Rejection>;

FilterResult filter_instance(const LeadSheet& sheet);

struct DatasetSplit {
  std::vector<LeadSheet> train;
  std::vector<LeadSheet> validation;
  std::vector<LeadSheet> test;
};

// 8:1:1 partition after a seeded shuffle: floor(0.8n) / floor(0.1n) /
// remainder. Requires at least 10 sheets.
DatasetSplit split_dataset(const std::vector<LeadSheet>& corpus, std::uint64_t seed);

}  // namespace leadsheet::score
