#include "leadsheet/metrics/tension.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "leadsheet/error.h"

namespace leadsheet::metrics {
namespace {

// Chord and key weights of the spiral array: root/tonic first, then fifth,
// then third (or subdominant for keys).
constexpr double kWeights[3] = {0.536, 0.274, 0.19};
// Share of the major dominant and of the minor subdominant in a minor key.
constexpr double kMinorDominantMix = 0.75;
constexpr double kMinorSubdominantMix = 0.75;

Vec3 mix(std::initializer_list<std::pair<double, Vec3>> terms) {
  Vec3 out{};
  for (const auto& [w, v] : terms) {
    for (int d = 0; d < 3; ++d) out[d] += w * v[d];
  }
  return out;
}

Vec3 major_chord(int k) {
  return mix({{kWeights[0], spiral_position(k)},
              {kWeights[1], spiral_position(k + 1)},
              {kWeights[2], spiral_position(k + 4)}});
}

Vec3 minor_chord(int k) {
  return mix({{kWeights[0], spiral_position(k)},
              {kWeights[1], spiral_position(k + 1)},
              {kWeights[2], spiral_position(k - 3)}});
}

struct Sounding {
  int start;
  int length;
  std::vector<int> pitch_classes;
};

std::vector<Sounding> timeline(const score::LeadSheet& sheet, std::vector<int>& bar_starts) {
  std::vector<Sounding> out;
  int onset = 0;
  for (const auto& bar : sheet.bars) {
    bar_starts.push_back(onset);
    for (const auto& e : bar.events) {
      Sounding s{onset, e.duration.ticks, {}};
      if (e.melody) s.pitch_classes.push_back(e.melody->midi % 12);
      if (!e.chord.is_rest()) {
        for (int iv : score::chord_intervals(e.chord.quality)) {
          s.pitch_classes.push_back((*e.chord.root + iv) % 12);
        }
      }
      if (!s.pitch_classes.empty()) out.push_back(std::move(s));
      onset += e.duration.ticks;
    }
  }
  bar_starts.push_back(onset);
  return out;
}

}  // namespace

double spiral_rise() { return std::sqrt(2.0 / 15.0); }

int fifth_index(int pitch_class) {
  static constexpr int kTable[12] = {0, 7, 2, 9, 4, -1, 6, 1, 8, 3, 10, 5};
  return kTable[((pitch_class % 12) + 12) % 12];
}

Vec3 spiral_position(int fifth) {
  // Quarter turn per fifth; the rounding of sin/cos at multiples of pi/2 is
  // avoided by reading the quadrant directly.
  static constexpr double kSin[4] = {0, 1, 0, -1};
  static constexpr double kCos[4] = {1, 0, -1, 0};
  const int q = ((fifth % 4) + 4) % 4;
  return {kSpiralRadius * kSin[q], kSpiralRadius * kCos[q], fifth * spiral_rise()};
}

double distance(const Vec3& a, const Vec3& b) {
  double sq = 0;
  for (int d = 0; d < 3; ++d) sq += (a[d] - b[d]) * (a[d] - b[d]);
  return std::sqrt(sq);
}

double cloud_diameter(std::span<const CloudNote> cloud) {
  double best = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (std::size_t j = i + 1; j < cloud.size(); ++j) {
      best = std::max(best, distance(spiral_position(cloud[i].fifth), spiral_position(cloud[j].fifth)));
    }
  }
  return best;
}

Vec3 center_of_effect(std::span<const CloudNote> cloud) {
  double total = 0;
  Vec3 out{};
  for (const auto& n : cloud) {
    const Vec3 p = spiral_position(n.fifth);
    for (int d = 0; d < 3; ++d) out[d] += n.weight * p[d];
    total += n.weight;
  }
  if (!(total > 0)) throw InvalidArgument("center of effect of a weightless cloud");
  for (auto& x : out) x /= total;
  return out;
}

Vec3 key_center(score::KeyMode mode) {
  if (mode == score::KeyMode::kMajor) {
    const int k = fifth_index(0);
    return mix({{kWeights[0], major_chord(k)},
                {kWeights[1], major_chord(k + 1)},
                {kWeights[2], major_chord(k - 1)}});
  }
  const int k = fifth_index(9);
  const Vec3 dominant =
      mix({{kMinorDominantMix, major_chord(k + 1)}, {1 - kMinorDominantMix, minor_chord(k + 1)}});
  const Vec3 subdominant = mix(
      {{kMinorSubdominantMix, minor_chord(k - 1)}, {1 - kMinorSubdominantMix, major_chord(k - 1)}});
  return mix({{kWeights[0], minor_chord(k)}, {kWeights[1], dominant}, {kWeights[2], subdominant}});
}

TensionProfile tension_profile(const score::LeadSheet& sheet, int window) {
  if (window < 0) throw InvalidArgument("tension window must be non-negative");
  std::vector<int> bounds;
  const auto notes = timeline(sheet, bounds);
  if (window > 0) {
    const int end = bounds.back();
    bounds.clear();
    for (int t = 0; t < end; t += window) bounds.push_back(t);
    bounds.push_back(end);
  }

  const Vec3 key = key_center(sheet.key);
  TensionProfile out;
  std::optional<Vec3> previous;
  std::size_t first = 0;  // notes end in order, so earlier windows never need older notes
  for (std::size_t w = 0; w + 1 < bounds.size(); ++w) {
    const int lo = bounds[w], hi = bounds[w + 1];
    std::map<int, double> weights;  // fifth index -> ticks sounding in the window
    while (first < notes.size() && notes[first].start + notes[first].length <= lo) ++first;
    for (std::size_t i = first; i < notes.size() && notes[i].start < hi; ++i) {
      const int overlap = std::min(hi, notes[i].start + notes[i].length) - std::max(lo, notes[i].start);
      if (overlap <= 0) continue;
      for (int pc : notes[i].pitch_classes) weights[fifth_index(pc)] += overlap;
    }
    if (weights.empty()) continue;
    std::vector<CloudNote> cloud;
    for (const auto& [k, weight] : weights) cloud.push_back({k, weight});
    const Vec3 ce = center_of_effect(cloud);
    TensionWindow tw{lo, hi - lo, cloud_diameter(cloud), std::nullopt, distance(ce, key)};
    if (previous) tw.momentum = distance(*previous, ce);
    previous = ce;
    out.windows.push_back(tw);
  }

  std::vector<double> d, m, s;
  for (const auto& tw : out.windows) {
    d.push_back(tw.diameter);
    if (tw.momentum) m.push_back(*tw.momentum);
    s.push_back(tw.strain);
  }
  out.diameter = summarize(d);
  out.momentum = summarize(m);
  out.strain = summarize(s);
  return out;
}

}  // namespace leadsheet::metrics
