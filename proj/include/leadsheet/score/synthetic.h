#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "leadsheet/rng.h"
#include "leadsheet/score/types.h"

namespace leadsheet::score {

// Random normalized lead sheets for tests, fixtures and benchmarks. Every
// sheet they return passes filter_instance.
struct SyntheticOptions {
  int min_bars = 4;
  int max_bars = 16;
  int phrase_length = 8;
  bool vary_meter = true;  // otherwise every sheet is 4/4
  double melody_rest_probability = 0.1;
  double chord_rest_probability = 0.02;
  double chord_change_probability = 0.35;  // per event after the first
  std::vector<ChordQuality> qualities{kPermittedQualities.begin(), kPermittedQualities.end()};
  // Relative weight of each entry of kPermittedDurations.
  std::array<double, kPermittedDurations.size()> duration_weights = {1, 1, 4, 2, 8,
                                                                     1, 0.5, 4, 0.5, 0.5};
};

LeadSheet random_sheet(Rng& rng, const SyntheticOptions& options = {});

std::vector<LeadSheet> random_corpus(int count, std::uint64_t seed,
                                     const SyntheticOptions& options = {});

// Random split of `capacity` ticks into permitted durations drawn with the
// given weights. Every prefix leaves a remainder that can still be filled.
std::vector<int> random_bar_rhythm(Rng& rng, int capacity,
                                   std::span<const double> duration_weights);

// Chord pools tied to valence: High bars use Major / MajorSeventh, Low bars
// use Minor / Diminished with at least as many Minor events as Diminished
// ones, so the computed bar descriptor is exactly High or Low.
enum class ValencePool { kHigh, kLow };

bool in_pool(const ChordSymbol& chord, ValencePool pool);

// `bars` bars whose pools follow `pools` (cycled when shorter than `bars`).
LeadSheet pooled_sheet(Rng& rng, int bars, std::span<const ValencePool> pools,
                       const SyntheticOptions& options = {});

// Corpus for checking valence conditioning: a quarter all-High, a quarter
// all-Low, the rest alternating High and Low in two-bar runs.
std::vector<LeadSheet> valence_pool_corpus(int count, std::uint64_t seed,
                                           const SyntheticOptions& options);

}  // namespace leadsheet::score
