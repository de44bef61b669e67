#include "leadsheet/affect/valence.h"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "leadsheet/error.h"
#include "leadsheet/score/corpus_json.h"

namespace leadsheet::affect {

using score::ChordQuality;

namespace {

ChordValenceTable make_builtin() {
  // Major is the one chord type whose cleaned tag coordinates are published;
  // its median reproduces the tabulated 0.87.
  std::vector<ChordValenceEntry> e = {
      {ChordQuality::kMajor,
       {"happiness", "cheerfulness", "confidence", "brightness", "satisfaction"},
       {{"happy", 0.89, std::nullopt},
        {"happy", 0.89, std::nullopt},
        {"confident", 0.51, std::nullopt},
        {"delighted", 0.87, std::nullopt},
        {"satisfied", 0.77, std::nullopt}},
       0.87},
      {ChordQuality::kMinor,
       {"sadness", "darkness", "sullenness", "apprehension", "melancholy", "depression",
        "mystery"},
       {},
       -0.81},
      {ChordQuality::kDominantSeventh, {"funkiness", "soulfulness", "moderate edginess"}, {},
       -0.02},
      {ChordQuality::kMajorSeventh,
       {"romance", "softness", "jazziness", "serenity", "tranquillity", "exhilaration"},
       {},
       0.83},
      {ChordQuality::kMinorSeventh, {"mellowness", "moodiness", "jazziness"}, {}, -0.46},
      {ChordQuality::kDominantNinth, {"openness", "optimism"}, {}, 0.51},
      {ChordQuality::kMinorNinth, {}, {}, -0.15},
      {ChordQuality::kDiminished, {"fear", "shock", "spookiness", "suspense"}, {}, -0.43},
  };
  return ChordValenceTable::from_json_text([&] {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& entry : e) {
      nlohmann::json tags = nlohmann::json::array();
      for (const auto& t : entry.cleaned_tags) {
        tags.push_back({{"name", t.name},
                        {"valence", t.valence ? nlohmann::json(*t.valence) : nlohmann::json()},
                        {"arousal", t.arousal ? nlohmann::json(*t.arousal) : nlohmann::json()}});
      }
      arr.push_back({{"quality", std::string(score::quality_name(entry.quality))},
                     {"described_as", entry.described_as},
                     {"cleaned_tags", tags},
                     {"valence", entry.valence}});
    }
    return nlohmann::json{{"format", "chord-valence"}, {"version", 1}, {"qualities", arr}}
        .dump();
  }());
}

std::optional<double> optional_number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (!j.at(key).is_number()) throw DataError(std::string("valence table: ") + key + " must be a number");
  return j.at(key).get<double>();
}

void check_unit_range(double v, const std::string& what) {
  if (!(v >= -1.0 && v <= 1.0)) throw DataError("valence table: " + what + " outside [-1, 1]");
}

}  // namespace

const ChordValenceTable& ChordValenceTable::builtin() {
  static const ChordValenceTable table = make_builtin();
  return table;
}

ChordValenceTable ChordValenceTable::from_file(const std::string& path) {
  return from_json_text(score::read_text_file(path));
}

ChordValenceTable ChordValenceTable::from_json_text(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("valence table: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != "chord-valence" || !j.contains("qualities")) {
    throw DataError("valence table: not a chord-valence file");
  }
  ChordValenceTable table;
  for (const auto& jq : j.at("qualities")) {
    ChordValenceEntry entry;
    const auto q = score::quality_from_name(jq.value("quality", ""));
    if (!q) throw DataError("valence table: unknown quality " + jq.value("quality", ""));
    if (!score::is_permitted_quality(*q)) {
      throw DataError("valence table: " + std::string(score::quality_name(*q)) +
                      " is not a permitted chord quality");
    }
    entry.quality = *q;
    if (jq.contains("described_as")) {
      entry.described_as = jq.at("described_as").get<std::vector<std::string>>();
    }
    std::vector<double> tag_values;
    bool complete = true;
    if (jq.contains("cleaned_tags")) {
      for (const auto& jt : jq.at("cleaned_tags")) {
        EmotionTag tag{jt.value("name", ""), optional_number(jt, "valence"),
                       optional_number(jt, "arousal")};
        if (tag.valence) {
          check_unit_range(*tag.valence, "tag " + tag.name);
          tag_values.push_back(*tag.valence);
        } else {
          complete = false;
        }
        if (tag.arousal) check_unit_range(*tag.arousal, "tag " + tag.name);
        entry.cleaned_tags.push_back(std::move(tag));
      }
    }
    const auto v = optional_number(jq, "valence");
    if (v) {
      entry.valence = *v;
    } else if (complete && !tag_values.empty()) {
      entry.valence = median_valence(tag_values);
    } else {
      throw DataError("valence table: " + std::string(score::quality_name(*q)) +
                      " has neither a valence nor a complete tag list");
    }
    check_unit_range(entry.valence, std::string(score::quality_name(*q)));
    if (v && complete && !tag_values.empty() &&
        std::abs(median_valence(tag_values) - *v) > 1e-12) {
      throw DataError("valence table: " + std::string(score::quality_name(*q)) +
                      " disagrees with the median of its tags");
    }
    table.entries_.push_back(std::move(entry));
  }
  for (ChordQuality q : score::kPermittedQualities) {
    const auto n = std::count_if(table.entries_.begin(), table.entries_.end(),
                                 [&](const ChordValenceEntry& e) { return e.quality == q; });
    if (n != 1) {
      throw DataError("valence table: " + std::string(score::quality_name(q)) +
                      " must appear exactly once");
    }
  }
  return table;
}

const ChordValenceEntry& ChordValenceTable::entry(ChordQuality q) const {
  for (const auto& e : entries_) {
    if (e.quality == q) return e;
  }
  throw UnsupportedChordError("no valence for chord quality " +
                              std::string(score::quality_name(q)));
}

double ChordValenceTable::valence(ChordQuality q) const { return entry(q).valence; }

std::string_view descriptor_name(ValenceDescriptor d) {
  switch (d) {
    case ValenceDescriptor::kLow: return "Low";
    case ValenceDescriptor::kModerateLow: return "ModerateLow";
    case ValenceDescriptor::kNeutral: return "Neutral";
    case ValenceDescriptor::kModerateHigh: return "ModerateHigh";
    case ValenceDescriptor::kHigh: return "High";
  }
  return "Neutral";
}

std::optional<ValenceDescriptor> descriptor_from_name(std::string_view name) {
  for (auto d : kAllDescriptors) {
    if (descriptor_name(d) == name) return d;
  }
  return std::nullopt;
}

double valence_of_quality(ChordQuality q, const ChordValenceTable& table) {
  return table.valence(q);
}

double median_valence(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("median of an empty valence list");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

std::optional<double> bar_valence(const score::Bar& bar, const ChordValenceTable& table) {
  std::vector<double> samples;
  for (const auto& e : bar.events) {
    if (!e.chord.is_rest()) samples.push_back(table.valence(e.chord.quality));
  }
  if (samples.empty()) return std::nullopt;
  return median_valence(samples);
}

ValenceDescriptor discretize(double v) {
  if (!(v >= -1.0 && v <= 1.0)) {
    throw InvalidArgument("valence " + std::to_string(v) + " outside [-1, 1]");
  }
  if (v < -0.6) return ValenceDescriptor::kLow;
  if (v < -0.2) return ValenceDescriptor::kModerateLow;
  if (v < 0.2) return ValenceDescriptor::kNeutral;
  if (v < 0.6) return ValenceDescriptor::kModerateHigh;
  return ValenceDescriptor::kHigh;
}

std::vector<ValenceDescriptor> bar_descriptors(const score::LeadSheet& sheet,
                                               const ChordValenceTable& table) {
  std::vector<ValenceDescriptor> out;
  ValenceDescriptor prev = ValenceDescriptor::kNeutral;
  for (const auto& bar : sheet.bars) {
    if (auto v = bar_valence(bar, table)) prev = discretize(*v);
    out.push_back(prev);
  }
  return out;
}

PieceValence piece_valence(const score::LeadSheet& sheet, const ChordValenceTable& table) {
  double sum = 0.0;
  int n = 0;
  for (const auto& bar : sheet.bars) {
    if (auto v = bar_valence(bar, table)) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) throw InvalidArgument("piece valence undefined: every chord is a rest");
  const double mean = sum / n;
  return {mean, discretize(mean)};
}

}  // namespace leadsheet::affect
