#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include "leadsheet/metrics/stats.h"
#include "leadsheet/score/types.h"

namespace leadsheet::metrics {

enum class Track { kMelody, kChords };

std::string_view track_name(Track t);  // "melody" / "chords"

// Pitch classes sounding in a bar. Chords contribute the tones of their
// quality template; rests contribute nothing.
std::array<bool, 12> bar_pitch_classes(const score::Bar& bar, Track track);

// Number of distinct pitch classes in every bar, in [0, 12].
std::vector<double> used_pitch_classes_per_bar(const score::LeadSheet& sheet, Track track);
Stats used_pitch_classes(const score::LeadSheet& sheet, Track track);

// Fraction of a bar's events that are rests on the given track.
std::vector<double> rest_ratio_per_bar(const score::LeadSheet& sheet, Track track);
Stats rest_ratio(const score::LeadSheet& sheet, Track track);

// Duration-weighted 12-bin chroma of one track of a bar, in ticks.
std::array<double, 12> bar_chroma(const score::Bar& bar, Track track);

// 6-D tonal centroid of a chroma vector: circle of fifths, minor thirds and
// major thirds, each as a (sin, cos) pair with radii 1, 1 and 0.5. The chroma
// is L1-normalised first; an all-zero chroma has no centroid.
using Centroid = std::array<double, 6>;
std::optional<Centroid> tonal_centroid(const std::array<double, 12>& chroma);

double centroid_distance(const Centroid& a, const Centroid& b);

struct TonalDistance {
  std::optional<double> value;  // mean over the bars that were measured
  std::vector<double> per_bar;
  int skipped_bars = 0;         // bars where either track is silent
};

// Melody versus chords, bar by bar.
TonalDistance tonal_distance(const score::LeadSheet& sheet);

}  // namespace leadsheet::metrics
