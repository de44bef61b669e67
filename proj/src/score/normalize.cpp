#include "leadsheet/score/normalize.h"

#include <algorithm>
#include <map>
#include <numeric>

#include "leadsheet/error.h"
#include "leadsheet/rng.h"

namespace leadsheet::score {

namespace {

constexpr double kRangeCentre = (kMinMelodyPitch + kMaxMelodyPitch) / 2.0;
constexpr int kDefaultPhraseLength = 8;

int mod12(int x) { return ((x % 12) + 12) % 12; }

int segment_shift(const RawScore& score, int segment) {
  const RawMeasure* first = nullptr;
  double sum = 0.0;
  int count = 0;
  for (const auto& m : score.measures) {
    if (m.key_segment != segment) continue;
    if (first == nullptr) first = &m;
    for (const auto& n : m.notes) {
      if (n.midi) {
        sum += *n.midi;
        ++count;
      }
    }
  }
  if (first == nullptr) return 0;
  const int target = first->key.mode.value_or(KeyMode::kMajor) == KeyMode::kMinor ? 9 : 0;
  const int down = mod12(first->key.tonic() - target);
  if (down == 0) return 0;
  if (count == 0) return -down;
  const double mean = sum / count;
  const double cost_down = std::abs(mean - down - kRangeCentre);
  const double cost_up = std::abs(mean + (12 - down) - kRangeCentre);
  return cost_up < cost_down ? 12 - down : -down;
}

// Order in which measures sound once repeats and voltas are played through.
std::vector<std::size_t> play_order(const std::vector<RawMeasure>& measures) {
  std::vector<std::size_t> order;
  const std::size_t n = measures.size();
  const std::size_t guard = 8 * n + 64;
  std::size_t i = 0;
  std::size_t start = 0;
  int pass = 1;
  bool jumped = false;
  while (i < n && order.size() < guard) {
    const RawMeasure& m = measures[i];
    if (m.repeat_forward && !(jumped && i == start)) {
      start = i;
      pass = 1;
    }
    jumped = false;
    if (!m.endings.empty() &&
        std::find(m.endings.begin(), m.endings.end(), pass) == m.endings.end()) {
      ++i;
      continue;
    }
    order.push_back(i);
    if (m.repeat_backward) {
      if (pass < m.repeat_times) {
        ++pass;
        i = start;
        jumped = true;
        continue;
      }
      pass = 1;
      start = i + 1;
    } else if (!m.endings.empty() && (i + 1 == n || measures[i + 1].endings.empty())) {
      pass = 1;
      start = i + 1;
    }
    ++i;
  }
  return order;
}

struct TimedNote {
  int on;
  int off;
  int midi;
  int id;
};

// Builds the events of one measure. `carry` is the chord sounding at the
// start of the measure and is updated to the chord sounding at its end.
Bar build_bar(const RawMeasure& m, ChordSymbol& carry, bool pickup) {
  Bar bar;
  bar.time_signature = m.time_signature;
  const int cap = m.time_signature.bar_ticks();
  const int shift = pickup ? std::max(0, cap - m.content_ticks) : 0;

  std::vector<RawNote> raw = m.notes;
  std::stable_sort(raw.begin(), raw.end(),
                   [](const RawNote& a, const RawNote& b) { return a.onset < b.onset; });
  std::vector<TimedNote> notes;
  std::vector<bool> open_tie;
  for (const auto& n : raw) {
    if (!n.midi || n.duration <= 0) continue;
    if (n.tie_stop) {
      // Same-bar tie: extend the note it continues.
      auto it = std::find_if(notes.rbegin(), notes.rend(), [&](const TimedNote& t) {
        return t.midi == *n.midi && t.off == n.onset + shift;
      });
      if (it != notes.rend() && open_tie[static_cast<std::size_t>(it->id)]) {
        it->off += n.duration;
        open_tie[static_cast<std::size_t>(it->id)] = n.tie_start;
        continue;
      }
    }
    notes.push_back({n.onset + shift, n.onset + shift + n.duration, *n.midi,
                     static_cast<int>(notes.size())});
    open_tie.push_back(n.tie_start);
  }

  std::vector<std::pair<int, ChordSymbol>> changes;
  for (const auto& h : m.harmonies) changes.emplace_back(h.onset + shift, h.chord);
  std::stable_sort(changes.begin(), changes.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<int> cuts = {0, cap};
  for (const auto& n : notes) {
    cuts.push_back(std::clamp(n.on, 0, cap));
    cuts.push_back(std::clamp(n.off, 0, cap));
  }
  for (const auto& c : changes) cuts.push_back(std::clamp(c.first, 0, cap));
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const ChordSymbol start_chord = carry;
  auto chord_at = [&](int t) {
    ChordSymbol c = start_chord;
    for (const auto& ch : changes) {
      if (ch.first <= t) c = ch.second;
    }
    return c;
  };

  int prev_note = -2;  // -1 = rest
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const int a = cuts[k];
    const int b = cuts[k + 1];
    int top = -1;
    for (const auto& n : notes) {
      if (n.on <= a && n.off >= b && (top < 0 || n.midi > notes[top].midi)) top = n.id;
    }
    const ChordSymbol chord = chord_at(a);
    if (!bar.events.empty() && top == prev_note && bar.events.back().chord == chord) {
      bar.events.back().duration.ticks += b - a;
      continue;
    }
    Event e;
    e.chord = chord;
    if (top >= 0) e.melody = Pitch{notes[top].midi};
    e.duration = Duration{b - a};
    bar.events.push_back(e);
    prev_note = top;
  }
  carry = changes.empty() ? start_chord : changes.back().second;
  return bar;
}

std::vector<std::size_t> phrase_starts(const std::vector<RawMeasure>& measures,
                                       const std::vector<std::size_t>& order,
                                       std::size_t begin, std::size_t end) {
  std::vector<std::size_t> starts = {0};
  for (std::size_t p = begin + 1; p < end; ++p) {
    const auto& cur = measures[order[p]];
    const auto& prev = measures[order[p - 1]];
    if (cur.phrase_start || prev.phrase_end || order[p] != order[p - 1] + 1) {
      starts.push_back(p - begin);
    }
  }
  return starts;
}

void assign_grouping(std::vector<Bar>& bars, std::vector<std::size_t> starts) {
  if (starts.size() <= 1) {
    starts.clear();
    for (std::size_t s = 0; s < bars.size(); s += kDefaultPhraseLength) starts.push_back(s);
  }
  starts.push_back(bars.size());
  for (std::size_t k = 0; k + 1 < starts.size(); ++k) {
    const auto labels = phrase_grouping(static_cast<int>(starts[k + 1] - starts[k]));
    for (std::size_t j = 0; j < labels.size(); ++j) bars[starts[k] + j].grouping = labels[j];
  }
}

}  // namespace

RawScore transpose_to_c(const RawScore& score) {
  RawScore out = score;
  for (int seg = 0; seg < score.key_segment_count(); ++seg) {
    const int shift = segment_shift(score, seg);
    for (auto& m : out.measures) {
      if (m.key_segment != seg) continue;
      for (auto& n : m.notes) {
        if (!n.midi) continue;
        *n.midi += shift;
        if (*n.midi < 0 || *n.midi > 127) {
          throw DataError("transposition moves a note outside MIDI 0..127 in measure " +
                          m.number);
        }
      }
      for (auto& h : m.harmonies) {
        if (h.chord.root) h.chord.root = mod12(*h.chord.root + shift);
      }
      m.key.fifths = 0;
      if (!m.key.mode) m.key.mode = KeyMode::kMajor;
    }
  }
  return out;
}

UnfoldResult unfold_and_split(const RawScore& score) {
  UnfoldResult result;
  const auto order = play_order(score.measures);
  ChordSymbol carry = ChordSymbol::rest();
  std::vector<Bar> bars;
  bars.reserve(order.size());
  for (std::size_t p = 0; p < order.size(); ++p) {
    const RawMeasure& m = score.measures[order[p]];
    const bool pickup = m.implicit || (p == 0 && m.content_ticks > 0 &&
                                       m.content_ticks < m.time_signature.bar_ticks());
    bars.push_back(build_bar(m, carry, pickup));
  }

  std::size_t begin = 0;
  while (begin < order.size()) {
    const int seg = score.measures[order[begin]].key_segment;
    std::size_t end = begin;
    while (end < order.size() && score.measures[order[end]].key_segment == seg) ++end;
    const std::size_t len = std::min<std::size_t>(end - begin, kMaxBars);
    if (len < static_cast<std::size_t>(kMinBars)) {
      result.discarded.push_back(
          {seg, static_cast<int>(len), "instance shorter than 4 bars after splitting"});
    } else {
      LeadSheet sheet;
      sheet.title = score.title;
      sheet.key = score.measures[order[begin]].key.mode.value_or(KeyMode::kMajor);
      sheet.bars.assign(bars.begin() + static_cast<long>(begin),
                        bars.begin() + static_cast<long>(begin + len));
      auto starts = phrase_starts(score.measures, order, begin, begin + len);
      assign_grouping(sheet.bars, std::move(starts));
      result.sheets.push_back(std::move(sheet));
    }
    begin = end;
  }
  return result;
}

std::string_view reject_reason_name(RejectReason r) {
  switch (r) {
    case RejectReason::kBarCount: return "bar count";
    case RejectReason::kTimeSignature: return "time signature";
    case RejectReason::kChordQuality: return "chord quality";
    case RejectReason::kDuration: return "duration";
    case RejectReason::kMelodyRange: return "melody range";
    case RejectReason::kBarCapacity: return "bar capacity";
  }
  return "unknown";
}

FilterResult filter_instance(const LeadSheet& sheet) {
  const int n = static_cast<int>(sheet.bars.size());
  if (n < kMinBars || n > kMaxBars) {
    return Rejection{RejectReason::kBarCount, std::to_string(n) + " bars"};
  }
  for (std::size_t i = 0; i < sheet.bars.size(); ++i) {
    if (!is_permitted_time_signature(sheet.bars[i].time_signature)) {
      return Rejection{RejectReason::kTimeSignature,
                       sheet.bars[i].time_signature.to_string() + " in bar " +
                           std::to_string(i + 1)};
    }
  }
  for (std::size_t i = 0; i < sheet.bars.size(); ++i) {
    for (const Event& e : sheet.bars[i].events) {
      if (!e.chord.is_rest() && !is_permitted_quality(e.chord.quality)) {
        return Rejection{RejectReason::kChordQuality,
                         e.chord.to_string() + " in bar " + std::to_string(i + 1)};
      }
    }
  }
  for (std::size_t i = 0; i < sheet.bars.size(); ++i) {
    for (const Event& e : sheet.bars[i].events) {
      if (!is_permitted_duration(e.duration.ticks)) {
        return Rejection{RejectReason::kDuration, std::to_string(e.duration.ticks) +
                                                      " ticks in bar " + std::to_string(i + 1)};
      }
    }
  }
  for (std::size_t i = 0; i < sheet.bars.size(); ++i) {
    for (const Event& e : sheet.bars[i].events) {
      if (e.melody && (e.melody->midi < kMinMelodyPitch || e.melody->midi > kMaxMelodyPitch)) {
        return Rejection{RejectReason::kMelodyRange, "MIDI " + std::to_string(e.melody->midi) +
                                                         " in bar " + std::to_string(i + 1)};
      }
    }
  }
  for (std::size_t i = 0; i < sheet.bars.size(); ++i) {
    const Bar& b = sheet.bars[i];
    if (b.events.empty() || b.filled_ticks() != b.time_signature.bar_ticks()) {
      return Rejection{RejectReason::kBarCapacity,
                       std::to_string(b.filled_ticks()) + " of " +
                           std::to_string(b.time_signature.bar_ticks()) + " ticks in bar " +
                           std::to_string(i + 1)};
    }
  }
  return sheet;
}

DatasetSplit split_dataset(const std::vector<LeadSheet>& corpus, std::uint64_t seed) {
  const std::size_t n = corpus.size();
  if (n < 10) {
    throw InvalidArgument("split_dataset needs at least 10 sheets, got " + std::to_string(n));
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(idx[i], idx[rng.below(i + 1)]);
  }
  const std::size_t n_train = n * 8 / 10;
  const std::size_t n_valid = n / 10;
  DatasetSplit out;
  for (std::size_t k = 0; k < n; ++k) {
    const LeadSheet& s = corpus[idx[k]];
    if (k < n_train) {
      out.train.push_back(s);
    } else if (k < n_train + n_valid) {
      out.validation.push_back(s);
    } else {
      out.test.push_back(s);
    }
  }
  return out;
}

}  // namespace leadsheet::score
