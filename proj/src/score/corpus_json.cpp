#include "leadsheet/score/corpus_json.h"

#include <fstream>
#include <sstream>

#include "leadsheet/error.h"

namespace leadsheet::score {

using nlohmann::json;

namespace {

const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw DataError(std::string("corpus JSON: missing \"") + key + "\"");
  }
  return j.at(key);
}

std::string require_string(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_string()) throw DataError(std::string("corpus JSON: \"") + key + "\" must be a string");
  return v.get<std::string>();
}

}  // namespace

json sheet_to_json(const LeadSheet& sheet) {
  json bars = json::array();
  for (const Bar& bar : sheet.bars) {
    json events = json::array();
    for (const Event& e : bar.events) {
      events.push_back({{"chord", e.chord.to_string()},
                        {"melody", e.melody ? json(e.melody->midi) : json(nullptr)},
                        {"ticks", e.duration.ticks}});
    }
    bars.push_back({{"time_signature", bar.time_signature.to_string()},
                    {"grouping", std::string(grouping_name(bar.grouping))},
                    {"events", std::move(events)}});
  }
  return {{"title", sheet.title},
          {"source", sheet.source},
          {"key", std::string(key_name(sheet.key))},
          {"bars", std::move(bars)}};
}

LeadSheet sheet_from_json(const json& j) {
  LeadSheet sheet;
  if (j.contains("title") && j["title"].is_string()) sheet.title = j["title"];
  if (j.contains("source") && j["source"].is_string()) sheet.source = j["source"];
  const auto key = key_from_name(require_string(j, "key"));
  if (!key) throw DataError("corpus JSON: key must be \"C major\" or \"A minor\"");
  sheet.key = *key;
  const json& bars = require(j, "bars");
  if (!bars.is_array()) throw DataError("corpus JSON: \"bars\" must be an array");
  for (const json& jb : bars) {
    Bar bar;
    const auto ts = TimeSignature::parse(require_string(jb, "time_signature"));
    if (!ts) throw DataError("corpus JSON: bad time signature");
    bar.time_signature = *ts;
    const auto g = grouping_from_name(require_string(jb, "grouping"));
    if (!g) throw DataError("corpus JSON: bad grouping label");
    bar.grouping = *g;
    const json& events = require(jb, "events");
    if (!events.is_array()) throw DataError("corpus JSON: \"events\" must be an array");
    for (const json& je : events) {
      Event e;
      const std::string chord = require_string(je, "chord");
      const auto c = ChordSymbol::parse(chord);
      if (!c) throw DataError("corpus JSON: unreadable chord \"" + chord + "\"");
      e.chord = *c;
      const json& mel = require(je, "melody");
      if (mel.is_number_integer()) {
        e.melody = Pitch{mel.get<int>()};
      } else if (!mel.is_null()) {
        throw DataError("corpus JSON: melody must be an integer or null");
      }
      const json& ticks = require(je, "ticks");
      if (!ticks.is_number_integer() || ticks.get<int>() <= 0) {
        throw DataError("corpus JSON: ticks must be a positive integer");
      }
      e.duration = Duration{ticks.get<int>()};
      bar.events.push_back(e);
    }
    sheet.bars.push_back(std::move(bar));
  }
  return sheet;
}

json corpus_to_json(const std::vector<LeadSheet>& sheets) {
  json arr = json::array();
  for (const auto& s : sheets) arr.push_back(sheet_to_json(s));
  return {{"format", "leadsheet-corpus"}, {"version", kCorpusVersion}, {"sheets", std::move(arr)}};
}

std::vector<LeadSheet> corpus_from_json(const json& j) {
  if (!j.is_object() || j.value("format", "") != "leadsheet-corpus") {
    throw DataError("not a leadsheet corpus file");
  }
  if (j.value("version", 0) != kCorpusVersion) {
    throw DataError("unsupported corpus version");
  }
  std::vector<LeadSheet> out;
  for (const json& s : require(j, "sheets")) out.push_back(sheet_from_json(s));
  return out;
}

std::string dump_corpus(const std::vector<LeadSheet>& sheets) {
  return corpus_to_json(sheets).dump(1) + "\n";
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << text;
  if (!out) throw DataError("write failed for " + path);
}

std::vector<LeadSheet> load_corpus(const std::string& path) {
  const std::string text = read_text_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(path + ": " + e.what());
  }
  return corpus_from_json(j);
}

void save_corpus(const std::string& path, const std::vector<LeadSheet>& sheets) {
  write_text_file(path, dump_corpus(sheets));
}

}  // namespace leadsheet::score
