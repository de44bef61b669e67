#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "leadsheet/affect/valence.h"
#include "leadsheet/rng.h"
#include "leadsheet/score/types.h"
#include "leadsheet/tokenizer/tokenizer.h"

namespace leadsheet::tokenizer {

// Empirical condition statistics of a corpus, as counts. Keys are the names
// used in corpus and token files ("4/4", "High", "medium").
struct ConditionProfile {
  std::string name;
  std::size_t pieces = 0;
  std::map<std::string, std::size_t> time_signatures;  // per bar
  std::map<std::string, std::size_t> valence;          // per bar
  std::map<std::string, std::size_t> density;          // per bar
  std::map<int, std::size_t> phrase_lengths;           // bars from one first1 to the next
  std::map<int, std::size_t> bar_counts;               // per piece
  friend bool operator==(const ConditionProfile&, const ConditionProfile&) = default;
};

// Throws InvalidArgument for an empty corpus.
ConditionProfile profile_of(const std::vector<score::LeadSheet>& corpus, std::string name,
                            const affect::ChordValenceTable& table =
                                affect::ChordValenceTable::builtin());

// {"format": "leadsheet-profile", "version": 1, "name", "pieces",
//  "time_signatures": {"4/4": 812, ...}, "valence", "density",
//  "phrase_lengths": {"8": 90, ...}, "bar_counts"}
nlohmann::json profile_to_json(const ConditionProfile& profile);
ConditionProfile profile_from_json(const nlohmann::json& j);  // throws DataError

// A random condition track of `bars` bars. The meter is drawn once for the
// whole track, phrases are drawn from the phrase-length distribution and
// labelled with phrase_grouping, and valence and density are drawn per bar.
// Throws InvalidArgument unless 1 <= bars <= 32.
ConditionTrack sample_template(const ConditionProfile& profile, int bars, Rng& rng);

}  // namespace leadsheet::tokenizer
