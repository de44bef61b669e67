#include "leadsheet/metrics/patterns.h"

#include <algorithm>
#include <tuple>

#include "leadsheet/error.h"

namespace leadsheet::metrics {
namespace {

constexpr int kChordBase = 48;  // C3

bool in_sorted(const std::vector<Point>& pts, Point p) {
  return std::binary_search(pts.begin(), pts.end(), p);
}

std::vector<Point> translators_of(const std::vector<Point>& pts, const std::vector<Point>& pattern) {
  std::vector<Point> out;
  const Point anchor = pattern.front();
  for (Point q : pts) {
    const Point v = q - anchor;
    bool fits = true;
    for (std::size_t k = 1; k < pattern.size() && fits; ++k) fits = in_sorted(pts, pattern[k] + v);
    if (fits) out.push_back(v);
  }
  return out;
}

struct Candidate {
  const Tec* tec;
  long covered;
  long cost;        // |pattern| + |translators| - 1
  long box_points;  // points inside the pattern's bounding box
};

// Lexicographic preference: ratio, coverage, compactness, smaller pattern.
bool better(const Candidate& a, const Candidate& b) {
  const long ra = a.covered * b.cost;
  const long rb = b.covered * a.cost;
  if (ra != rb) return ra > rb;
  if (a.covered != b.covered) return a.covered > b.covered;
  const long ca = static_cast<long>(a.tec->pattern.size()) * b.box_points;
  const long cb = static_cast<long>(b.tec->pattern.size()) * a.box_points;
  if (ca != cb) return ca > cb;
  return std::tie(a.tec->pattern, a.tec->translators) < std::tie(b.tec->pattern, b.tec->translators);
}

long points_in_box(const std::vector<Point>& pts, const std::vector<Point>& pattern) {
  int lo_t = pattern.front().onset, hi_t = pattern.back().onset;
  int lo_p = pattern.front().pitch, hi_p = lo_p;
  for (Point p : pattern) {
    lo_p = std::min(lo_p, p.pitch);
    hi_p = std::max(hi_p, p.pitch);
  }
  long n = 0;
  for (Point q : pts) {
    if (q.onset >= lo_t && q.onset <= hi_t && q.pitch >= lo_p && q.pitch <= hi_p) ++n;
  }
  return n;
}

}  // namespace

PointSet::PointSet(std::vector<Point> points) : points_(std::move(points)) {
  std::sort(points_.begin(), points_.end());
  points_.erase(std::unique(points_.begin(), points_.end()), points_.end());
}

bool PointSet::contains(Point p) const { return in_sorted(points_, p); }

PointSet point_set_of(const score::LeadSheet& sheet) {
  std::vector<Point> pts;
  int onset = 0;
  std::optional<score::ChordSymbol> previous;
  for (const auto& bar : sheet.bars) {
    for (const auto& e : bar.events) {
      if (e.melody) pts.push_back({onset, e.melody->midi});
      if (!e.chord.is_rest() && !(previous && *previous == e.chord)) {
        for (int iv : score::chord_intervals(e.chord.quality)) {
          pts.push_back({onset, kChordBase + *e.chord.root + iv});
        }
      }
      previous = e.chord;
      onset += e.duration.ticks;
    }
  }
  return PointSet(std::move(pts));
}

std::vector<Point> coverage(const Tec& tec) {
  std::vector<Point> out;
  out.reserve(tec.pattern.size() * tec.translators.size());
  for (Point t : tec.translators) {
    for (Point p : tec.pattern) out.push_back(p + t);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Point> maximal_translatable_pattern(const PointSet& ps, Point v) {
  std::vector<Point> out;
  for (Point p : ps.points()) {
    if (ps.contains(p + v)) out.push_back(p);
  }
  return out;
}

std::vector<Tec> siatec(const PointSet& ps) {
  const auto& pts = ps.points();
  const std::size_t n = pts.size();
  // Difference vectors p_j - p_i for i < j are all positive because the
  // points are sorted. Grouping them by vector gives each MTP in order.
  std::vector<std::pair<Point, int>> table;
  table.reserve(n * (n - (n > 0 ? 1 : 0)) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) table.push_back({pts[j] - pts[i], static_cast<int>(i)});
  }
  std::sort(table.begin(), table.end());

  std::vector<std::vector<Point>> patterns;
  for (std::size_t a = 0; a < table.size();) {
    std::size_t b = a;
    std::vector<Point> pattern;
    while (b < table.size() && table[b].first == table[a].first) pattern.push_back(pts[table[b++].second]);
    patterns.push_back(std::move(pattern));
    a = b;
  }
  std::sort(patterns.begin(), patterns.end());
  patterns.erase(std::unique(patterns.begin(), patterns.end()), patterns.end());

  std::vector<Tec> out;
  out.reserve(patterns.size());
  for (auto& pattern : patterns) {
    Tec tec;
    tec.translators = translators_of(pts, pattern);
    tec.pattern = std::move(pattern);
    out.push_back(std::move(tec));
  }
  return out;
}

CosiatecResult cosiatec(const PointSet& ps) {
  if (ps.empty()) throw InvalidArgument("cosiatec needs at least one point");
  CosiatecResult result;
  PointSet remaining = ps;
  long cost = 0;
  while (!remaining.empty()) {
    auto tecs = siatec(remaining);
    if (tecs.empty()) tecs.push_back({remaining.points(), {Point{0, 0}}});
    std::optional<Candidate> best;
    std::vector<Point> best_cover;
    for (const auto& tec : tecs) {
      auto cover = coverage(tec);
      Candidate c{&tec, static_cast<long>(cover.size()),
                  static_cast<long>(tec.pattern.size() + tec.translators.size() - 1),
                  points_in_box(remaining.points(), tec.pattern)};
      if (!best || better(c, *best)) {
        best = c;
        best_cover = std::move(cover);
      }
    }
    cost += best->cost;
    result.encoding.tecs.push_back(*best->tec);

    std::vector<Point> left;
    std::set_difference(remaining.points().begin(), remaining.points().end(), best_cover.begin(),
                        best_cover.end(), std::back_inserter(left));
    remaining = PointSet(std::move(left));
  }
  result.compression_ratio = static_cast<double>(ps.size()) / static_cast<double>(cost);
  for (const auto& tec : result.encoding.tecs) {
    if (coverage(tec).size() <= tec.pattern.size() + tec.translators.size() - 1) continue;
    const int size = static_cast<int>(tec.pattern.size());
    result.longest_pattern = std::max(result.longest_pattern, size);
    result.shortest_pattern = result.shortest_pattern == 0 ? size : std::min(result.shortest_pattern, size);
  }
  return result;
}

PointSet decompress(const Encoding& encoding) {
  std::vector<Point> pts;
  for (const auto& tec : encoding.tecs) {
    const auto cover = coverage(tec);
    pts.insert(pts.end(), cover.begin(), cover.end());
  }
  return PointSet(std::move(pts));
}

}  // namespace leadsheet::metrics
