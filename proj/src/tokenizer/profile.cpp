#include "leadsheet/tokenizer/profile.h"

#include "leadsheet/error.h"

namespace leadsheet::tokenizer {
namespace {

constexpr const char* kFormat = "leadsheet-profile";
constexpr int kVersion = 1;

template <typename K>
const K& draw(const std::map<K, std::size_t>& counts, Rng& rng, const char* what) {
  std::size_t total = 0;
  for (const auto& [k, n] : counts) total += n;
  if (total == 0) throw DataError(std::string("profile has no ") + what + " counts");
  std::uint64_t pick = rng.below(total);
  for (const auto& [k, n] : counts) {
    if (pick < n) return k;
    pick -= n;
  }
  return counts.rbegin()->first;
}

template <typename Check>
std::map<std::string, std::size_t> named_counts(const nlohmann::json& j, const char* key,
                                                Check valid) {
  std::map<std::string, std::size_t> out;
  for (const auto& [name, n] : j.at(key).items()) {
    if (!valid(name)) throw DataError(std::string("profile: unknown ") + key + " \"" + name + "\"");
    out[name] = n.template get<std::size_t>();
  }
  return out;
}

std::map<int, std::size_t> length_counts(const nlohmann::json& j, const char* key) {
  std::map<int, std::size_t> out;
  for (const auto& [name, n] : j.at(key).items()) {
    int length = 0;
    try {
      length = std::stoi(name);
    } catch (const std::exception&) {
      length = 0;
    }
    if (length < 1 || std::to_string(length) != name) {
      throw DataError(std::string("profile: bad ") + key + " entry \"" + name + "\"");
    }
    out[length] = n.get<std::size_t>();
  }
  return out;
}

template <typename K>
nlohmann::json counts_json(const std::map<K, std::size_t>& counts) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [k, n] : counts) {
    if constexpr (std::is_same_v<K, int>) {
      out[std::to_string(k)] = n;
    } else {
      out[k] = n;
    }
  }
  return out;
}

}  // namespace

ConditionProfile profile_of(const std::vector<score::LeadSheet>& corpus, std::string name,
                            const affect::ChordValenceTable& table) {
  if (corpus.empty()) throw InvalidArgument("cannot profile an empty corpus");
  ConditionProfile p;
  p.name = std::move(name);
  p.pieces = corpus.size();
  for (const auto& sheet : corpus) {
    ++p.bar_counts[static_cast<int>(sheet.bars.size())];
    int phrase = 0;
    for (const auto& c : conditions_of(sheet, table)) {
      ++p.time_signatures[c.time_signature.to_string()];
      ++p.valence[std::string(affect::descriptor_name(c.valence))];
      ++p.density[std::string(density_name(c.density))];
      if (c.grouping == score::Grouping::kFirst1 && phrase > 0) {
        ++p.phrase_lengths[phrase];
        phrase = 0;
      }
      ++phrase;
    }
    if (phrase > 0) ++p.phrase_lengths[phrase];
  }
  return p;
}

nlohmann::json profile_to_json(const ConditionProfile& p) {
  return {{"format", kFormat},
          {"version", kVersion},
          {"name", p.name},
          {"pieces", p.pieces},
          {"time_signatures", counts_json(p.time_signatures)},
          {"valence", counts_json(p.valence)},
          {"density", counts_json(p.density)},
          {"phrase_lengths", counts_json(p.phrase_lengths)},
          {"bar_counts", counts_json(p.bar_counts)}};
}

ConditionProfile profile_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != kFormat) throw DataError("not a condition profile");
    if (j.at("version") != kVersion) throw DataError("unsupported condition profile version");
    ConditionProfile p;
    p.name = j.at("name").get<std::string>();
    p.pieces = j.at("pieces").get<std::size_t>();
    p.time_signatures = named_counts(j, "time_signatures", [](const std::string& s) {
      const auto ts = score::TimeSignature::parse(s);
      return ts && score::is_permitted_time_signature(*ts);
    });
    p.valence = named_counts(j, "valence", [](const std::string& s) {
      return affect::descriptor_from_name(s).has_value();
    });
    p.density = named_counts(j, "density",
                             [](const std::string& s) { return density_from_name(s).has_value(); });
    p.phrase_lengths = length_counts(j, "phrase_lengths");
    p.bar_counts = length_counts(j, "bar_counts");
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad condition profile: ") + e.what());
  }
}

ConditionTrack sample_template(const ConditionProfile& profile, int bars, Rng& rng) {
  if (bars < 1 || bars > score::kMaxBars) {
    throw InvalidArgument("template length must be 1.." + std::to_string(score::kMaxBars) +
                          " bars");
  }
  const auto meter = *score::TimeSignature::parse(draw(profile.time_signatures, rng, "meter"));
  ConditionTrack track;
  while (static_cast<int>(track.size()) < bars) {
    const int length =
        std::min(draw(profile.phrase_lengths, rng, "phrase length"), bars - static_cast<int>(track.size()));
    for (auto g : score::phrase_grouping(length)) {
      BarCondition c;
      c.time_signature = meter;
      c.grouping = g;
      track.push_back(c);
    }
  }
  for (auto& c : track) {
    c.valence = *affect::descriptor_from_name(draw(profile.valence, rng, "valence"));
    c.density = *density_from_name(draw(profile.density, rng, "density"));
  }
  return track;
}

}  // namespace leadsheet::tokenizer
