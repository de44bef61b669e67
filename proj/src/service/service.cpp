#include "leadsheet/service/service.h"

#include <algorithm>
#include <cstdlib>
#include <fstream>

#include "leadsheet/affect/valence.h"
#include "leadsheet/error.h"
#include "leadsheet/metrics/report.h"
#include "leadsheet/score/corpus_json.h"
#include "leadsheet/score/musicxml.h"
#include "leadsheet/seq2seq/generate.h"

namespace leadsheet::service {

using nlohmann::json;

namespace {

constexpr int kAutoPhraseLength = 8;
constexpr const char* kProfileSuffix = ".profile.json";
constexpr const char* kManifestSuffix = ".manifest.json";

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

json with_version(json body) {
  body["api_version"] = kApiVersion;
  return body;
}

Response ok(json body) { return {200, with_version(std::move(body))}; }

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw DataError(std::string("missing \"") + key + "\"");
  return j.at(key);
}

std::string string_field(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_string()) throw DataError(std::string("\"") + key + "\" must be a string");
  return v.get<std::string>();
}

std::uint64_t seed_of(const json& request) {
  if (!request.contains("seed") || request.at("seed").is_null()) return 0;
  const json& s = request.at("seed");
  if (!s.is_number_integer() || s.get<std::int64_t>() < 0) {
    throw DataError("\"seed\" must be a non-negative integer");
  }
  return s.get<std::uint64_t>();
}

json piece_valence_json(const score::LeadSheet& sheet) {
  bool any_chord = false;
  for (const auto& bar : sheet.bars) {
    for (const auto& e : bar.events) any_chord = any_chord || !e.chord.is_rest();
  }
  if (!any_chord) return nullptr;
  const auto p = affect::piece_valence(sheet);
  return {{"value", p.value}, {"descriptor", affect::descriptor_name(p.descriptor)}};
}

// Sheets named by a /metrics request: {"sheet": ...}, {"sheets": [...]}, a
// corpus document, or {"corpus": "<name>"} under the configured directory.
std::vector<score::LeadSheet> sheets_of(const json& request, const ServiceConfig& config,
                                        Response& failure) {
  if (request.contains("sheet")) return {score::sheet_from_json(request.at("sheet"))};
  if (request.contains("sheets")) {
    std::vector<score::LeadSheet> out;
    if (!request.at("sheets").is_array()) throw DataError("\"sheets\" must be an array");
    for (const auto& s : request.at("sheets")) out.push_back(score::sheet_from_json(s));
    return out;
  }
  if (request.contains("format")) return score::corpus_from_json(request);
  if (request.contains("corpus")) {
    const std::string name = string_field(request, "corpus");
    const bool safe = !name.empty() && name[0] != '.' &&
                      std::all_of(name.begin(), name.end(), [](char c) {
                        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
                               c == '-' || c == '.';
                      });
    if (!safe) throw DataError("corpus names may only use letters, digits, '.', '_' and '-'");
    const auto path = config.corpus_dir / (name + ".json");
    if (config.corpus_dir.empty() || !std::filesystem::exists(path)) {
      failure = error_response(404, "unknown corpus \"" + name + "\"");
      return {};
    }
    return score::load_corpus(path.string());
  }
  throw DataError("expected \"sheet\", \"sheets\", \"corpus\" or a corpus document");
}

}  // namespace

// --- configuration ----------------------------------------------------------

json ServiceConfig::to_json() const {
  return {{"host", host},
          {"port", port},
          {"model_dir", model_dir.string()},
          {"corpus_dir", corpus_dir.string()},
          {"threads", threads}};
}

ServiceConfig load_service_config(const std::filesystem::path& path) {
  ServiceConfig c;
  json j;
  try {
    j = json::parse(score::read_text_file(path.string()));
    if (!j.is_object()) throw DataError("service config must be a JSON object");
    if (j.contains("host")) c.host = j.at("host").get<std::string>();
    if (j.contains("port")) c.port = j.at("port").get<int>();
    if (j.contains("model_dir")) c.model_dir = j.at("model_dir").get<std::string>();
    if (j.contains("corpus_dir")) c.corpus_dir = j.at("corpus_dir").get<std::string>();
    if (j.contains("threads")) c.threads = j.at("threads").get<int>();
  } catch (const json::exception& e) {
    throw DataError("bad service config " + path.string() + ": " + e.what());
  }
  if (c.port < 0 || c.port > 65535) throw DataError("service port must be 0..65535");
  if (c.threads < 1) throw DataError("service threads must be positive");
  return c;
}

void apply_environment(ServiceConfig& config, const EnvLookup& lookup) {
  if (const char* host = lookup("LEADSHEET_HOST"); host && *host) config.host = host;
  if (const char* dir = lookup("LEADSHEET_MODEL_DIR"); dir && *dir) config.model_dir = dir;
  if (const char* port = lookup("LEADSHEET_PORT"); port && *port) {
    char* end = nullptr;
    const long value = std::strtol(port, &end, 10);
    if (*end != '\0' || value < 0 || value > 65535) {
      throw DataError(std::string("LEADSHEET_PORT is not a port number: ") + port);
    }
    config.port = static_cast<int>(value);
  }
}

// --- registry ---------------------------------------------------------------

Registry Registry::load(const std::filesystem::path& model_dir) {
  Registry r;
  if (!std::filesystem::is_directory(model_dir)) {
    r.warnings_.push_back("model directory " + model_dir.string() + " does not exist");
    return r;
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(model_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    const std::string file = path.filename().string();
    if (ends_with(file, kManifestSuffix)) continue;
    try {
      if (ends_with(file, kProfileSuffix)) {
        r.add_profile(tokenizer::profile_from_json(json::parse(score::read_text_file(path.string()))));
      } else {
        r.add_model(path.stem().string(), seq2seq::load_checkpoint(path));
      }
    } catch (const std::exception& e) {
      r.warnings_.push_back("skipped " + file + ": " + e.what());
    }
  }
  return r;
}

void Registry::add_model(std::string id, seq2seq::Checkpoint checkpoint) {
  models_.insert_or_assign(std::move(id), std::move(checkpoint));
}

void Registry::add_profile(tokenizer::ConditionProfile profile) {
  std::string name = profile.name;
  profiles_.insert_or_assign(std::move(name), std::move(profile));
}

const seq2seq::Checkpoint* Registry::model(const std::string& id) const {
  const auto it = models_.find(id);
  return it == models_.end() ? nullptr : &it->second;
}

const tokenizer::ConditionProfile* Registry::profile(const std::string& name) const {
  const auto it = profiles_.find(name);
  return it == profiles_.end() ? nullptr : &it->second;
}

// --- conditions -------------------------------------------------------------

json condition_to_json(const tokenizer::BarCondition& c) {
  return {{"time_signature", c.time_signature.to_string()},
          {"grouping", score::grouping_name(c.grouping)},
          {"valence", affect::descriptor_name(c.valence)},
          {"density", tokenizer::density_name(c.density)}};
}

tokenizer::ConditionTrack conditions_from_json(const json& bars) {
  if (!bars.is_array()) throw DataError("\"bars\" must be an array of conditions");
  const int n = static_cast<int>(bars.size());
  if (n < 1 || n > score::kMaxBars) {
    throw DataError("a piece needs 1.." + std::to_string(score::kMaxBars) + " bars, got " +
                    std::to_string(n));
  }
  std::vector<score::Grouping> automatic;
  for (int start = 0; start < n; start += kAutoPhraseLength) {
    for (auto g : score::phrase_grouping(std::min(kAutoPhraseLength, n - start))) automatic.push_back(g);
  }
  tokenizer::ConditionTrack track;
  for (int i = 0; i < n; ++i) {
    const json& b = bars[static_cast<std::size_t>(i)];
    const std::string where = "bar " + std::to_string(i + 1) + ": ";
    try {
      tokenizer::BarCondition c;
      const auto ts = score::TimeSignature::parse(string_field(b, "time_signature"));
      if (!ts || !score::is_permitted_time_signature(*ts)) throw DataError("unsupported time signature");
      c.time_signature = *ts;
      const std::string grouping =
          b.contains("grouping") && !b.at("grouping").is_null() ? string_field(b, "grouping") : "auto";
      if (grouping == "auto") {
        c.grouping = automatic[static_cast<std::size_t>(i)];
      } else if (const auto g = score::grouping_from_name(grouping)) {
        c.grouping = *g;
      } else {
        throw DataError("unknown grouping \"" + grouping + "\"");
      }
      const std::string valence = string_field(b, "valence");
      const auto d = affect::descriptor_from_name(valence);
      if (!d) throw DataError("unknown valence \"" + valence + "\"");
      c.valence = *d;
      const std::string density = string_field(b, "density");
      const auto dens = tokenizer::density_from_name(density);
      if (!dens) throw DataError("unknown density \"" + density + "\"");
      c.density = *dens;
      track.push_back(c);
    } catch (const DataError& e) {
      throw DataError(where + e.what());
    }
  }
  return track;
}

// --- handlers ---------------------------------------------------------------

Response error_response(int status, const std::string& message) {
  return {status, with_version({{"error", {{"status", status}, {"message", message}}}})};
}

Service::Service(std::shared_ptr<const Registry> registry, ServiceConfig config)
    : registry_(std::move(registry)), config_(std::move(config)) {}

Response Service::generate(const json& request) const {
  tokenizer::ConditionTrack track;
  seq2seq::SamplerConfig sampler;
  std::string model_id;
  try {
    model_id = string_field(request, "model");
    track = conditions_from_json(field(request, "bars"));
    if (request.contains("sampler")) sampler = seq2seq::SamplerConfig::from_json(request.at("sampler"));
    sampler.seed = seed_of(request);
  } catch (const DataError& e) {
    return error_response(400, e.what());
  }
  const auto* checkpoint = registry_->model(model_id);
  if (checkpoint == nullptr) return error_response(404, "unknown model \"" + model_id + "\"");
  if (!request.contains("sampler") || !request.at("sampler").contains("max_length")) {
    sampler.max_length = checkpoint->model->config().max_length;
  }
  if (sampler.max_length > checkpoint->model->config().max_length) {
    return error_response(400, "max_length exceeds the model's limit of " +
                                   std::to_string(checkpoint->model->config().max_length));
  }

  seq2seq::Generation gen;
  try {
    gen = seq2seq::generate(*checkpoint->model, track, checkpoint->encoder_vocab,
                            checkpoint->decoder_vocab, sampler);
  } catch (const IncompleteGenerationError& e) {
    json partial = json::array();
    for (int id : e.partial()) partial.push_back(checkpoint->decoder_vocab.text(id));
    Response r = error_response(500, e.what());
    r.body["error"]["partial_tokens"] = partial;
    return r;
  }

  const auto realized = tokenizer::conditions_of(gen.sheet);
  json bars = json::array();
  for (std::size_t i = 0; i < track.size(); ++i) {
    const auto v = affect::bar_valence(gen.sheet.bars[i]);
    bars.push_back({{"requested", condition_to_json(track[i])},
                    {"realized",
                     {{"valence", affect::descriptor_name(realized[i].valence)},
                      {"valence_value", v ? json(*v) : json(nullptr)},
                      {"density", tokenizer::density_name(realized[i].density)},
                      {"events", gen.sheet.bars[i].events.size()}}},
                    {"valence_matches", realized[i].valence == track[i].valence},
                    {"density_matches", realized[i].density == track[i].density}});
  }
  json tokens = json::array();
  for (int id : gen.tokens.ids) tokens.push_back(checkpoint->decoder_vocab.text(id));
  return ok({{"model", model_id},
             {"seed", sampler.seed},
             {"temperature", gen.temperature},
             {"sheet", score::sheet_to_json(gen.sheet)},
             {"tokens", tokens},
             {"bars", bars},
             {"piece_valence", piece_valence_json(gen.sheet)},
             {"musicxml", score::write_musicxml(gen.sheet)}});
}

Response Service::make_template(const json& request) const {
  std::string name;
  int bars = 0;
  std::uint64_t seed = 0;
  try {
    name = string_field(request, "profile");
    const json& b = field(request, "bars");
    if (!b.is_number_integer()) throw DataError("\"bars\" must be an integer");
    bars = b.get<int>();
    if (bars < 1 || bars > score::kMaxBars) {
      throw DataError("a template needs 1.." + std::to_string(score::kMaxBars) + " bars");
    }
    seed = seed_of(request);
  } catch (const DataError& e) {
    return error_response(400, e.what());
  }
  const auto* profile = registry_->profile(name);
  if (profile == nullptr) return error_response(404, "unknown profile \"" + name + "\"");
  Rng rng(seed);
  json out = json::array();
  for (const auto& c : tokenizer::sample_template(*profile, bars, rng)) out.push_back(condition_to_json(c));
  return ok({{"profile", name}, {"seed", seed}, {"bars", out}});
}

Response Service::valence(const json& request) const {
  try {
    const json& j = request.contains("sheet") ? request.at("sheet") : request;
    const auto sheet = score::sheet_from_json(j);
    const auto descriptors = affect::bar_descriptors(sheet);
    json bars = json::array();
    for (std::size_t i = 0; i < sheet.bars.size(); ++i) {
      const auto v = affect::bar_valence(sheet.bars[i]);
      bars.push_back({{"value", v ? json(*v) : json(nullptr)},
                      {"descriptor", affect::descriptor_name(descriptors[i])}});
    }
    return ok({{"bars", bars}, {"piece", piece_valence_json(sheet)}});
  } catch (const UnsupportedChordError& e) {
    return error_response(422, e.what());
  } catch (const DataError& e) {
    return error_response(400, e.what());
  }
}

Response Service::metrics(const json& request) const {
  try {
    Response failure;
    auto sheets = sheets_of(request, config_, failure);
    if (failure.status != 200) return failure;
    if (sheets.empty()) throw DataError("no sheets to evaluate");
    const std::string label =
        request.contains("label") ? string_field(request, "label") : std::string("Input");
    auto body = metrics::report_to_json({metrics::evaluate_corpus(label, sheets)});
    return ok(std::move(body));
  } catch (const DataError& e) {
    return error_response(400, e.what());
  }
}

Response Service::models() const {
  json list = json::array();
  for (const auto& [id, cp] : registry_->models()) {
    list.push_back({{"id", id},
                    {"architecture", seq2seq::architecture_name(cp.model->config().architecture)},
                    {"config", cp.model->config().to_json()},
                    {"parameters", cp.model->parameters().count()},
                    {"vocab_hash", seq2seq::vocab_pair_hash(cp.encoder_vocab, cp.decoder_vocab)},
                    {"metadata", cp.metadata}});
  }
  json profiles = json::array();
  for (const auto& [name, p] : registry_->profiles()) {
    profiles.push_back({{"name", name}, {"pieces", p.pieces}});
  }
  return ok({{"models", list}, {"profiles", profiles}});
}

Response Service::vocab(const std::optional<std::string>& model) const {
  auto tokens = [](const tokenizer::Vocabulary& v) {
    return json{{"hash", v.hash()}, {"tokens", v.tokens()}};
  };
  if (!model) {
    return ok({{"encoder", tokens(tokenizer::Vocabulary::encoder())},
               {"decoder", tokens(tokenizer::Vocabulary::decoder_full())}});
  }
  const auto* cp = registry_->model(*model);
  if (cp == nullptr) return error_response(404, "unknown model \"" + *model + "\"");
  return ok({{"model", *model},
             {"encoder", tokens(cp->encoder_vocab)},
             {"decoder", tokens(cp->decoder_vocab)}});
}

Response Service::openapi() const { return {200, openapi_document()}; }

Response Service::handle(const std::string& method, const std::string& path, const std::string& body,
                         const std::map<std::string, std::string>& query) const {
  try {
    if (method == "GET") {
      if (path == "/models") return models();
      if (path == "/vocab") {
        const auto it = query.find("model");
        return vocab(it == query.end() ? std::nullopt : std::optional<std::string>(it->second));
      }
      if (path == "/openapi.json") return openapi();
    } else if (method == "POST") {
      if (path == "/generate" || path == "/template" || path == "/valence" || path == "/metrics") {
        const json request = json::parse(body, nullptr, false);
        if (request.is_discarded() || !request.is_object()) {
          return error_response(400, "request body must be a JSON object");
        }
        if (path == "/generate") return generate(request);
        if (path == "/template") return make_template(request);
        if (path == "/valence") return valence(request);
        return metrics(request);
      }
    }
    return error_response(404, "no route for " + method + " " + path);
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

}  // namespace leadsheet::service
