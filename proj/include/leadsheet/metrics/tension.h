#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "leadsheet/metrics/stats.h"
#include "leadsheet/score/types.h"

namespace leadsheet::metrics {

using Vec3 = std::array<double, 3>;

inline constexpr double kSpiralRadius = 1.0;
// h = sqrt(2/15) puts a major third and a perfect fifth at equal distance.
double spiral_rise();

// Position on the line of fifths (C = 0, G = 1, F = -1) using the fixed
// sharp spelling C G D A E B F# C# G# D# A#, with F the one flat-side class.
int fifth_index(int pitch_class);

Vec3 spiral_position(int fifth);

double distance(const Vec3& a, const Vec3& b);

// One note of a cloud: spelled position and weight (duration in ticks).
struct CloudNote {
  int fifth = 0;
  double weight = 1;
};

// Largest distance between two notes of the cloud; 0 for fewer than two.
double cloud_diameter(std::span<const CloudNote> cloud);

// Weighted centroid of the cloud's positions. Requires a positive total weight.
Vec3 center_of_effect(std::span<const CloudNote> cloud);

// Center of effect of the normalised key (C major or A minor), built from its
// tonic, dominant and subdominant chords.
Vec3 key_center(score::KeyMode mode);

struct TensionWindow {
  int start = 0;  // ticks from the start of the piece
  int length = 0;
  double diameter = 0;
  std::optional<double> momentum;  // none for the first measured window
  double strain = 0;
};

struct TensionProfile {
  std::vector<TensionWindow> windows;  // empty windows are skipped
  Stats diameter;
  Stats momentum;
  Stats strain;
};

// Melody and chord tones in consecutive windows of `window` ticks. With
// window == 0 each bar is one window.
TensionProfile tension_profile(const score::LeadSheet& sheet, int window = 0);

}  // namespace leadsheet::metrics
