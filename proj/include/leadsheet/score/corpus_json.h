#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "leadsheet/score/types.h"

namespace leadsheet::score {

// Corpus file layout (version 1):
//
//   {"format": "leadsheet-corpus", "version": 1,
//    "sheets": [{"title": "...", "source": "...", "key": "C major",
//                "bars": [{"time_signature": "4/4", "grouping": "first1",
//                          "events": [{"chord": "Am7", "melody": 69, "ticks": 24}]}]}]}
//
// "melody" is null for a rest; "chord" is "N.C." for a chord rest. Unknown
// keys are ignored so annotated corpora (see `leadsheet valence`) still load.
inline constexpr int kCorpusVersion = 1;

nlohmann::json sheet_to_json(const LeadSheet& sheet);
LeadSheet sheet_from_json(const nlohmann::json& j);  // throws DataError

nlohmann::json corpus_to_json(const std::vector<LeadSheet>& sheets);
std::vector<LeadSheet> corpus_from_json(const nlohmann::json& j);

// Text form used on disk; stable for identical input.
std::string dump_corpus(const std::vector<LeadSheet>& sheets);

std::vector<LeadSheet> load_corpus(const std::string& path);
void save_corpus(const std::string& path, const std::vector<LeadSheet>& sheets);

// Reads a whole file or throws DataError.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace leadsheet::score
