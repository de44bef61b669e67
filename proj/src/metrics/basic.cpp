#include "leadsheet/metrics/basic.h"

#include <cmath>
#include <numbers>

namespace leadsheet::metrics {
namespace {

bool is_rest(const score::Event& e, Track track) {
  return track == Track::kMelody ? !e.melody.has_value() : e.chord.is_rest();
}

template <typename F>
void for_each_pitch_class(const score::Event& e, Track track, F&& f) {
  if (is_rest(e, track)) return;
  if (track == Track::kMelody) {
    f(e.melody->midi % 12);
    return;
  }
  for (int iv : score::chord_intervals(e.chord.quality)) f((*e.chord.root + iv) % 12);
}

template <typename F>
std::vector<double> per_bar(const score::LeadSheet& sheet, F&& f) {
  std::vector<double> out;
  out.reserve(sheet.bars.size());
  for (const auto& bar : sheet.bars) out.push_back(f(bar));
  return out;
}

}  // namespace

std::string_view track_name(Track t) { return t == Track::kMelody ? "melody" : "chords"; }

std::array<bool, 12> bar_pitch_classes(const score::Bar& bar, Track track) {
  std::array<bool, 12> used{};
  for (const auto& e : bar.events) for_each_pitch_class(e, track, [&](int pc) { used[pc] = true; });
  return used;
}

std::vector<double> used_pitch_classes_per_bar(const score::LeadSheet& sheet, Track track) {
  return per_bar(sheet, [&](const score::Bar& bar) {
    int n = 0;
    for (bool b : bar_pitch_classes(bar, track)) n += b ? 1 : 0;
    return static_cast<double>(n);
  });
}

Stats used_pitch_classes(const score::LeadSheet& sheet, Track track) {
  return summarize(used_pitch_classes_per_bar(sheet, track));
}

std::vector<double> rest_ratio_per_bar(const score::LeadSheet& sheet, Track track) {
  return per_bar(sheet, [&](const score::Bar& bar) {
    if (bar.events.empty()) return 0.0;
    int rests = 0;
    for (const auto& e : bar.events) rests += is_rest(e, track) ? 1 : 0;
    return static_cast<double>(rests) / static_cast<double>(bar.events.size());
  });
}

Stats rest_ratio(const score::LeadSheet& sheet, Track track) {
  return summarize(rest_ratio_per_bar(sheet, track));
}

std::array<double, 12> bar_chroma(const score::Bar& bar, Track track) {
  std::array<double, 12> chroma{};
  for (const auto& e : bar.events) {
    for_each_pitch_class(e, track, [&](int pc) { chroma[pc] += e.duration.ticks; });
  }
  return chroma;
}

std::optional<Centroid> tonal_centroid(const std::array<double, 12>& chroma) {
  double total = 0;
  for (double c : chroma) total += std::abs(c);
  if (total == 0) return std::nullopt;
  using std::numbers::pi;
  constexpr double kStep[3] = {7 * pi / 6, 3 * pi / 2, 2 * pi / 3};
  constexpr double kRadius[3] = {1, 1, 0.5};
  Centroid out{};
  for (int pc = 0; pc < 12; ++pc) {
    const double w = chroma[pc] / total;
    if (w == 0) continue;
    for (int d = 0; d < 3; ++d) {
      out[2 * d] += w * kRadius[d] * std::sin(pc * kStep[d]);
      out[2 * d + 1] += w * kRadius[d] * std::cos(pc * kStep[d]);
    }
  }
  return out;
}

double centroid_distance(const Centroid& a, const Centroid& b) {
  double sq = 0;
  for (std::size_t i = 0; i < a.size(); ++i) sq += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(sq);
}

TonalDistance tonal_distance(const score::LeadSheet& sheet) {
  TonalDistance out;
  for (const auto& bar : sheet.bars) {
    const auto melody = tonal_centroid(bar_chroma(bar, Track::kMelody));
    const auto chords = tonal_centroid(bar_chroma(bar, Track::kChords));
    if (!melody || !chords) {
      ++out.skipped_bars;
      continue;
    }
    out.per_bar.push_back(centroid_distance(*melody, *chords));
  }
  if (!out.per_bar.empty()) out.value = summarize(out.per_bar).mean;
  return out;
}

}  // namespace leadsheet::metrics
