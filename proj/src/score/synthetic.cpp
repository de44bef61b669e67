#include "leadsheet/score/synthetic.h"

#include <algorithm>

#include "leadsheet/error.h"

namespace leadsheet::score {

namespace {

// fillable[r]: r ticks can be written as a sum of durations with positive weight.
std::vector<bool> fill_table(int capacity, std::span<const double> weights) {
  std::vector<bool> fillable(static_cast<std::size_t>(capacity) + 1, false);
  fillable[0] = true;
  for (int r = 1; r <= capacity; ++r) {
    for (std::size_t i = 0; i < kPermittedDurations.size(); ++i) {
      const int t = kPermittedDurations[i];
      if (weights[i] > 0 && t <= r && fillable[static_cast<std::size_t>(r - t)]) {
        fillable[static_cast<std::size_t>(r)] = true;
        break;
      }
    }
  }
  return fillable;
}

std::size_t weighted_pick(Rng& rng, std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double x = rng.uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (x < weights[i]) return i;
    x -= weights[i];
  }
  // Rounding can leave x just past the last bucket.
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0) return i;
  }
  throw InvalidArgument("all weights are zero");
}

TimeSignature pick_meter(Rng& rng, const SyntheticOptions& options) {
  if (!options.vary_meter) return {4, 4};
  // 4/4 dominates real lead-sheet corpora; the other meters share the rest.
  const double weights[] = {6, 2, 1, 1, 1};
  return kPermittedTimeSignatures[weighted_pick(rng, weights)];
}

std::optional<Pitch> pick_melody(Rng& rng, const SyntheticOptions& options,
                                 std::optional<Pitch> previous) {
  if (rng.uniform() < options.melody_rest_probability) return std::nullopt;
  // Mostly stepwise motion around the previous pitch keeps the lines plausible.
  int p = previous ? previous->midi + static_cast<int>(rng.below(9)) - 4
                   : kMinMelodyPitch + static_cast<int>(rng.below(kMaxMelodyPitch -
                                                                  kMinMelodyPitch + 1));
  p = std::clamp(p, kMinMelodyPitch, kMaxMelodyPitch);
  return Pitch{p};
}

void assign_phrases(LeadSheet& sheet, int phrase_length) {
  const int n = static_cast<int>(sheet.bars.size());
  for (int start = 0; start < n; start += phrase_length) {
    const int len = std::min(phrase_length, n - start);
    const auto labels = phrase_grouping(len);
    for (int i = 0; i < len; ++i) {
      sheet.bars[static_cast<std::size_t>(start + i)].grouping = labels[static_cast<std::size_t>(i)];
    }
  }
}

}  // namespace

std::vector<int> random_bar_rhythm(Rng& rng, int capacity,
                                   std::span<const double> duration_weights) {
  if (duration_weights.size() != kPermittedDurations.size()) {
    throw InvalidArgument("one duration weight per permitted duration expected");
  }
  const auto fillable = fill_table(capacity, duration_weights);
  if (!fillable[static_cast<std::size_t>(capacity)]) {
    throw InvalidArgument("bar of " + std::to_string(capacity) +
                          " ticks cannot be filled with the weighted durations");
  }
  std::vector<int> rhythm;
  int remaining = capacity;
  std::vector<double> w(kPermittedDurations.size());
  while (remaining > 0) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      const int t = kPermittedDurations[i];
      w[i] = (t <= remaining && fillable[static_cast<std::size_t>(remaining - t)])
                 ? duration_weights[i]
                 : 0.0;
    }
    const int t = kPermittedDurations[weighted_pick(rng, w)];
    rhythm.push_back(t);
    remaining -= t;
  }
  return rhythm;
}

LeadSheet random_sheet(Rng& rng, const SyntheticOptions& options) {
  if (options.min_bars < kMinBars || options.max_bars > kMaxBars ||
      options.min_bars > options.max_bars || options.qualities.empty()) {
    throw InvalidArgument("synthetic options out of range");
  }
  LeadSheet sheet;
  sheet.key = rng.below(4) == 0 ? KeyMode::kMinor : KeyMode::kMajor;
  const int bars = options.min_bars +
                   static_cast<int>(rng.below(static_cast<std::uint64_t>(
                       options.max_bars - options.min_bars + 1)));
  const TimeSignature meter = pick_meter(rng, options);
  ChordSymbol chord = ChordSymbol::of(sheet.key == KeyMode::kMajor ? 0 : 9,
                                      options.qualities.front());
  std::optional<Pitch> melody;
  for (int b = 0; b < bars; ++b) {
    Bar bar;
    bar.time_signature = meter;
    for (int ticks : random_bar_rhythm(rng, meter.bar_ticks(), options.duration_weights)) {
      const bool first = b == 0 && bar.events.empty();
      if (first || rng.uniform() < options.chord_change_probability) {
        if (!first && rng.uniform() < options.chord_rest_probability) {
          chord = ChordSymbol::rest();
        } else {
          chord = ChordSymbol::of(static_cast<int>(rng.below(12)),
                                  options.qualities[rng.below(options.qualities.size())]);
        }
      }
      auto m = pick_melody(rng, options, melody);
      // Adjacent rests under one chord would read back from MusicXML as a
      // single rest of their combined length.
      if (!m && !bar.events.empty() && !bar.events.back().melody &&
          bar.events.back().chord == chord) {
        m = melody.value_or(Pitch{(kMinMelodyPitch + kMaxMelodyPitch) / 2});
      }
      if (m) melody = m;
      bar.events.push_back({chord, m, Duration{ticks}});
    }
    sheet.bars.push_back(std::move(bar));
  }
  assign_phrases(sheet, options.phrase_length);
  return sheet;
}

std::vector<LeadSheet> random_corpus(int count, std::uint64_t seed,
                                     const SyntheticOptions& options) {
  Rng rng(seed);
  std::vector<LeadSheet> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) {
    Rng piece = rng.fork(static_cast<std::uint64_t>(i));
    LeadSheet sheet = random_sheet(piece, options);
    sheet.title = "synthetic " + std::to_string(i + 1);
    sheet.source = "synthetic:" + std::to_string(seed);
    out.push_back(std::move(sheet));
  }
  return out;
}

bool in_pool(const ChordSymbol& chord, ValencePool pool) {
  if (chord.is_rest()) return false;
  if (pool == ValencePool::kHigh) {
    return chord.quality == ChordQuality::kMajor || chord.quality == ChordQuality::kMajorSeventh;
  }
  return chord.quality == ChordQuality::kMinor || chord.quality == ChordQuality::kDiminished;
}

LeadSheet pooled_sheet(Rng& rng, int bars, std::span<const ValencePool> pools,
                       const SyntheticOptions& options) {
  if (bars < kMinBars || bars > kMaxBars || pools.empty()) {
    throw InvalidArgument("pooled sheet needs 4..32 bars and at least one pool");
  }
  LeadSheet sheet;
  const TimeSignature meter = pick_meter(rng, options);
  std::optional<Pitch> melody;
  for (int b = 0; b < bars; ++b) {
    const ValencePool pool = pools[static_cast<std::size_t>(b) % pools.size()];
    const ChordQuality qualities[2] = {
        pool == ValencePool::kHigh ? ChordQuality::kMajor : ChordQuality::kMinor,
        pool == ValencePool::kHigh ? ChordQuality::kMajorSeventh : ChordQuality::kDiminished};
    Bar bar;
    bar.time_signature = meter;
    ChordSymbol chord;
    for (int ticks : random_bar_rhythm(rng, meter.bar_ticks(), options.duration_weights)) {
      if (bar.events.empty() || rng.uniform() < options.chord_change_probability) {
        chord = ChordSymbol::of(static_cast<int>(rng.below(12)), qualities[rng.below(2)]);
      }
      auto m = pick_melody(rng, options, melody);
      // Adjacent rests under one chord would read back from MusicXML as a
      // single rest of their combined length.
      if (!m && !bar.events.empty() && !bar.events.back().melody &&
          bar.events.back().chord == chord) {
        m = melody.value_or(Pitch{(kMinMelodyPitch + kMaxMelodyPitch) / 2});
      }
      if (m) melody = m;
      bar.events.push_back({chord, m, Duration{ticks}});
    }
    if (pool == ValencePool::kLow) {
      // Keep the median at Minor (or halfway to Diminished, still below -0.6).
      int minor = 0;
      int dim = 0;
      for (const auto& e : bar.events) (e.chord.quality == ChordQuality::kMinor ? minor : dim)++;
      for (auto& e : bar.events) {
        if (dim <= minor) break;
        if (e.chord.quality == ChordQuality::kDiminished) {
          e.chord.quality = ChordQuality::kMinor;
          --dim;
          ++minor;
        }
      }
    }
    sheet.bars.push_back(std::move(bar));
  }
  assign_phrases(sheet, options.phrase_length);
  return sheet;
}

std::vector<LeadSheet> valence_pool_corpus(int count, std::uint64_t seed,
                                           const SyntheticOptions& options) {
  Rng rng(seed);
  std::vector<LeadSheet> out;
  const ValencePool high[] = {ValencePool::kHigh};
  const ValencePool low[] = {ValencePool::kLow};
  const ValencePool alternating[] = {ValencePool::kHigh, ValencePool::kHigh, ValencePool::kLow,
                                     ValencePool::kLow};
  const ValencePool alternating_low[] = {ValencePool::kLow, ValencePool::kLow, ValencePool::kHigh,
                                         ValencePool::kHigh};
  for (int i = 0; i < count; ++i) {
    Rng piece = rng.fork(static_cast<std::uint64_t>(i));
    const int bars = options.min_bars +
                     static_cast<int>(piece.below(static_cast<std::uint64_t>(
                         options.max_bars - options.min_bars + 1)));
    std::span<const ValencePool> pools;
    switch (i % 4) {
      case 0: pools = high; break;
      case 1: pools = low; break;
      case 2: pools = alternating; break;
      default: pools = alternating_low; break;
    }
    LeadSheet sheet = pooled_sheet(piece, bars, pools, options);
    sheet.title = "pooled " + std::to_string(i + 1);
    sheet.source = "synthetic-pool:" + std::to_string(seed);
    out.push_back(std::move(sheet));
  }
  return out;
}

}  // namespace leadsheet::score
