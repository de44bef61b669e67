#pragma once

#include <compare>
#include <vector>

#include "leadsheet/score/types.h"

namespace leadsheet::metrics {

struct Point {
  int onset = 0;  // ticks from the start of the piece
  int pitch = 0;  // MIDI
  friend auto operator<=>(const Point&, const Point&) = default;
};

inline Point operator+(Point a, Point b) { return {a.onset + b.onset, a.pitch + b.pitch}; }
inline Point operator-(Point a, Point b) { return {a.onset - b.onset, a.pitch - b.pitch}; }

// Sorted, duplicate-free set of points.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(std::vector<Point> points);  // sorts and removes duplicates

  const std::vector<Point>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  bool contains(Point p) const;
  friend bool operator==(const PointSet&, const PointSet&) = default;

 private:
  std::vector<Point> points_;
};

// Melody notes and chord tones of a sheet. A chord adds its template tones
// voiced upwards from the octave of C3 at the onset where it first sounds;
// an event that repeats the previous chord adds nothing.
PointSet point_set_of(const score::LeadSheet& sheet);

// Translational equivalence class: `pattern` occurs at every translator. The
// zero vector is always among the translators.
struct Tec {
  std::vector<Point> pattern;     // sorted
  std::vector<Point> translators; // sorted
  friend bool operator==(const Tec&, const Tec&) = default;
};

std::vector<Point> coverage(const Tec& tec);  // sorted, duplicate-free

// {p in ps : p + v in ps} for the given vector.
std::vector<Point> maximal_translatable_pattern(const PointSet& ps, Point v);

// Every distinct maximal translatable pattern for a vector greater than zero,
// with all of its translators. Sorted by pattern.
std::vector<Tec> siatec(const PointSet& ps);

struct Encoding {
  std::vector<Tec> tecs;  // in selection order; coverages are disjoint
};

struct CosiatecResult {
  Encoding encoding;
  double compression_ratio = 0;  // |ps| / sum(|pattern| + |translators| - 1)
  // Sizes of the largest and smallest selected pattern whose class covers
  // more points than it costs to encode; 0 when no class compresses.
  int longest_pattern = 0;
  int shortest_pattern = 0;
};

// Greedy compression. Each round runs SIATEC on the points not yet covered and
// keeps the class with the best compression ratio, breaking ties by coverage,
// then compactness, then the smaller pattern in lexicographic order.
// Throws InvalidArgument for an empty set.
CosiatecResult cosiatec(const PointSet& ps);

PointSet decompress(const Encoding& encoding);

}  // namespace leadsheet::metrics
