#include <gtest/gtest.h>
#include <httplib.h>

#include <filesystem>
#include <fstream>
#include <thread>

#include "leadsheet/affect/valence.h"
#include "leadsheet/error.h"
#include "leadsheet/score/corpus_json.h"
#include "leadsheet/score/synthetic.h"
#include "leadsheet/seq2seq/checkpoint.h"
#include "leadsheet/service/service.h"

namespace leadsheet::service {
namespace {

using nlohmann::json;

seq2seq::ModelConfig tiny_config() {
  auto c = seq2seq::ModelConfig::desk(seq2seq::Architecture::kLstm);
  c.embedding = 8;
  c.hidden = 8;
  c.layers = 1;
  return c;
}

seq2seq::Checkpoint tiny_checkpoint() {
  seq2seq::Checkpoint cp{nullptr, tokenizer::Vocabulary::encoder(),
                         tokenizer::Vocabulary::decoder_full(), json{{"note", "untrained"}}};
  cp.model = seq2seq::make_model(tiny_config(), static_cast<int>(cp.encoder_vocab.size()),
                                 static_cast<int>(cp.decoder_vocab.size()));
  cp.model->initialize(3);
  return cp;
}

tokenizer::ConditionProfile fixture_profile() {
  return tokenizer::profile_of(score::random_corpus(20, 8), "fixture");
}

std::shared_ptr<const Registry> registry() {
  static const auto r = [] {
    auto reg = std::make_shared<Registry>();
    reg->add_model("tiny", tiny_checkpoint());
    reg->add_profile(fixture_profile());
    return std::shared_ptr<const Registry>(reg);
  }();
  return r;
}

json bars_of(int n, const char* valence = "High") {
  json bars = json::array();
  for (int i = 0; i < n; ++i) {
    bars.push_back({{"time_signature", "4/4"}, {"grouping", "auto"}, {"valence", valence},
                    {"density", "medium"}});
  }
  return bars;
}

score::LeadSheet sheet_with(std::vector<score::ChordSymbol> chords) {
  score::LeadSheet s;
  for (const auto& c : chords) {
    score::Bar bar;
    bar.events.push_back({c, score::Pitch{64}, {96}});
    s.bars.push_back(bar);
  }
  return s;
}

// --- generate ---------------------------------------------------------------

TEST(Generate, SeededRequestIsDeterministic) {
  const Service service(registry());
  const json req = {{"model", "tiny"}, {"bars", bars_of(8)}, {"seed", 42}};
  const auto a = service.generate(req);
  const auto b = service.generate(req);
  ASSERT_EQ(a.status, 200) << a.body.dump();
  EXPECT_EQ(a.body, b.body);
  EXPECT_EQ(a.body["api_version"], kApiVersion);
  const auto other = service.generate({{"model", "tiny"}, {"bars", bars_of(8)}, {"seed", 43}});
  EXPECT_NE(a.body["tokens"], other.body["tokens"]);
}

TEST(Generate, RealizedStatisticsComeFromTheOutput) {
  const Service service(registry());
  const auto r = service.generate({{"model", "tiny"}, {"bars", bars_of(6, "Low")}, {"seed", 1}});
  ASSERT_EQ(r.status, 200) << r.body.dump();
  const auto sheet = score::sheet_from_json(r.body["sheet"]);
  ASSERT_EQ(sheet.bars.size(), 6u);
  ASSERT_EQ(r.body["bars"].size(), 6u);
  const auto realized = tokenizer::conditions_of(sheet);
  for (std::size_t i = 0; i < 6; ++i) {
    const auto& bar = r.body["bars"][i];
    EXPECT_EQ(bar["requested"]["valence"], "Low");
    EXPECT_EQ(bar["realized"]["valence"], affect::descriptor_name(realized[i].valence));
    EXPECT_EQ(bar["realized"]["density"], tokenizer::density_name(realized[i].density));
    EXPECT_EQ(bar["realized"]["events"], sheet.bars[i].events.size());
    EXPECT_EQ(bar["valence_matches"], realized[i].valence == affect::ValenceDescriptor::kLow);
  }
  // Auto grouping lays out one 8-bar phrase truncated to six bars.
  EXPECT_EQ(r.body["bars"][0]["requested"]["grouping"], "first1");
  EXPECT_EQ(r.body["bars"][5]["requested"]["grouping"], "last1");
  EXPECT_NE(r.body["musicxml"].get<std::string>().find("<score-partwise"), std::string::npos);
  EXPECT_EQ(r.body["tokens"].front(), "<s>");
  EXPECT_EQ(r.body["tokens"].back(), "</s>");
}

TEST(Generate, RejectsBadRequests) {
  const Service service(registry());
  EXPECT_EQ(service.generate({{"model", "tiny"}, {"bars", json::array()}}).status, 400);
  EXPECT_EQ(service.generate({{"model", "tiny"}, {"bars", bars_of(33)}}).status, 400);
  auto bad = bars_of(4);
  bad[2]["valence"] = "Ecstatic";
  const auto r = service.generate({{"model", "tiny"}, {"bars", bad}});
  EXPECT_EQ(r.status, 400);
  EXPECT_NE(r.body["error"]["message"].get<std::string>().find("bar 3"), std::string::npos);
  bad = bars_of(4);
  bad[0]["time_signature"] = "5/4";
  EXPECT_EQ(service.generate({{"model", "tiny"}, {"bars", bad}}).status, 400);
  EXPECT_EQ(service.generate({{"model", "tiny"}, {"bars", bars_of(2)}, {"seed", -1}}).status, 400);
  EXPECT_EQ(service.generate({{"model", "tiny"},
                              {"bars", bars_of(2)},
                              {"sampler", {{"temperature", 0}}}})
                .status,
            400);
  EXPECT_EQ(service.generate({{"bars", bars_of(2)}}).status, 400);
  EXPECT_EQ(service.generate({{"model", "missing"}, {"bars", bars_of(2)}}).status, 404);
}

TEST(Generate, LengthLimitGivesServerErrorWithPartialStream) {
  const Service service(registry());
  const auto r = service.generate(
      {{"model", "tiny"}, {"bars", bars_of(8)}, {"sampler", {{"max_length", 20}}}});
  EXPECT_EQ(r.status, 500);
  EXPECT_EQ(r.body["error"]["partial_tokens"].size(), 20u);
  const auto too_long = service.generate(
      {{"model", "tiny"}, {"bars", bars_of(2)}, {"sampler", {{"max_length", 100000}}}});
  EXPECT_EQ(too_long.status, 400);
}

// --- template ---------------------------------------------------------------

TEST(Template, DeterministicAndPhraseShaped) {
  const Service service(registry());
  const json req = {{"profile", "fixture"}, {"bars", 12}, {"seed", 9}};
  const auto a = service.make_template(req);
  ASSERT_EQ(a.status, 200) << a.body.dump();
  EXPECT_EQ(a.body, service.make_template(req).body);
  ASSERT_EQ(a.body["bars"].size(), 12u);
  EXPECT_EQ(a.body["bars"][0]["grouping"], "first1");
  // A template is a valid generation request.
  EXPECT_EQ(service.generate({{"model", "tiny"}, {"bars", a.body["bars"]}}).status, 200);
  EXPECT_EQ(service.make_template({{"profile", "nope"}, {"bars", 4}}).status, 404);
  EXPECT_EQ(service.make_template({{"profile", "fixture"}, {"bars", 0}}).status, 400);
  EXPECT_EQ(service.make_template({{"profile", "fixture"}, {"bars", "8"}}).status, 400);
}

// --- valence ----------------------------------------------------------------

TEST(Valence, AllMajorIsHigh) {
  const Service service(registry());
  const auto c = score::ChordSymbol::of(0, score::ChordQuality::kMajor);
  const auto r = service.valence(score::sheet_to_json(sheet_with({c, c, c})));
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_EQ(r.body["piece"]["descriptor"], "High");
  EXPECT_EQ(r.body["piece"]["value"], 0.87);
  EXPECT_EQ(r.body["bars"].size(), 3u);
}

TEST(Valence, MatchesTheAffectModule) {
  const Service service(registry());
  for (const auto& sheet : score::random_corpus(10, 19)) {
    const auto r = service.valence({{"sheet", score::sheet_to_json(sheet)}});
    ASSERT_EQ(r.status, 200);
    const auto descriptors = affect::bar_descriptors(sheet);
    for (std::size_t i = 0; i < sheet.bars.size(); ++i) {
      EXPECT_EQ(r.body["bars"][i]["descriptor"], affect::descriptor_name(descriptors[i]));
      const auto v = affect::bar_valence(sheet.bars[i]);
      if (v) {
        EXPECT_EQ(r.body["bars"][i]["descriptor"], affect::descriptor_name(affect::discretize(*v)));
      }
    }
    EXPECT_EQ(r.body["piece"]["value"], affect::piece_valence(sheet).value);
  }
}

TEST(Valence, UnsupportedQualityIs422AndGarbageIs400) {
  const Service service(registry());
  const auto sus = score::ChordSymbol::of(0, score::ChordQuality::kSuspendedFourth);
  const auto r = service.valence(score::sheet_to_json(sheet_with({sus})));
  EXPECT_EQ(r.status, 422);
  EXPECT_NE(r.body["error"]["message"].get<std::string>().find("SuspendedFourth"), std::string::npos);
  EXPECT_EQ(service.valence({{"bars", 3}}).status, 400);
  EXPECT_EQ(service.valence(json::object()).status, 400);
}

// --- metrics ----------------------------------------------------------------

TEST(Metrics, SingleSheetAndDuplicates) {
  const Service service(registry());
  const auto sheet = score::sheet_to_json(score::random_corpus(1, 30)[0]);
  const auto one = service.metrics({{"sheet", sheet}});
  ASSERT_EQ(one.status, 200) << one.body.dump();
  EXPECT_EQ(one.body, service.metrics({{"sheet", sheet}}).body);
  const auto& rows = one.body["reports"][0]["rows"];
  for (std::size_t i = 4; i < rows.size(); ++i) EXPECT_EQ(rows[i]["std"], 0.0);
  const auto two = service.metrics({{"sheets", {sheet, sheet}}});
  ASSERT_EQ(two.status, 200);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_DOUBLE_EQ(two.body["reports"][0]["rows"][i]["mean"].get<double>(),
                     rows[i]["mean"].get<double>());
  }
  EXPECT_EQ(service.metrics({{"sheets", json::array()}}).status, 400);
  EXPECT_EQ(service.metrics({{"sheet", 5}}).status, 400);
  EXPECT_EQ(service.metrics({{"what", 1}}).status, 400);
}

TEST(Metrics, CorpusReferences) {
  const auto dir = std::filesystem::temp_directory_path() / "leadsheet_service_corpora";
  std::filesystem::create_directories(dir);
  score::save_corpus((dir / "small.json").string(), score::random_corpus(3, 2));
  ServiceConfig config;
  config.corpus_dir = dir;
  const Service service(registry(), config);
  const auto r = service.metrics({{"corpus", "small"}, {"label", "Small"}});
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_EQ(r.body["reports"][0]["pieces"], 3);
  EXPECT_EQ(r.body["reports"][0]["label"], "Small");
  EXPECT_EQ(service.metrics({{"corpus", "absent"}}).status, 404);
  EXPECT_EQ(service.metrics({{"corpus", "../small"}}).status, 400);
  EXPECT_EQ(Service(registry()).metrics({{"corpus", "small"}}).status, 404);
  // A corpus document posted directly works too.
  EXPECT_EQ(service.metrics(score::corpus_to_json(score::random_corpus(2, 2))).status, 200);
}

// --- registry, vocab, routing -------------------------------------------------

TEST(Service, ModelsVocabAndOpenApi) {
  const Service service(registry());
  const auto models = service.models();
  ASSERT_EQ(models.body["models"].size(), 1u);
  EXPECT_EQ(models.body["models"][0]["id"], "tiny");
  EXPECT_EQ(models.body["models"][0]["architecture"], "lstm");
  EXPECT_EQ(models.body["profiles"][0]["name"], "fixture");

  const auto vocab = service.vocab(std::string("tiny"));
  ASSERT_EQ(vocab.status, 200);
  EXPECT_EQ(vocab.body["encoder"]["tokens"].size(), tokenizer::Vocabulary::encoder().size());
  EXPECT_EQ(service.vocab(std::string("nope")).status, 404);
  EXPECT_EQ(service.vocab(std::nullopt).status, 200);

  const auto doc = service.openapi().body;
  EXPECT_EQ(doc["openapi"], "3.0.3");
  for (const char* path :
       {"/generate", "/template", "/valence", "/metrics", "/models", "/vocab", "/openapi.json"}) {
    EXPECT_TRUE(doc["paths"].contains(path)) << path;
  }
  // Every schema reference resolves.
  const std::string text = doc.dump();
  for (std::size_t at = text.find("#/components/schemas/"); at != std::string::npos;
       at = text.find("#/components/schemas/", at + 1)) {
    const std::size_t start = at + std::string("#/components/schemas/").size();
    const std::string name = text.substr(start, text.find('"', start) - start);
    EXPECT_TRUE(doc["components"]["schemas"].contains(name)) << name;
  }
}

TEST(Service, HandleRoutesAndSurvivesGarbage) {
  const Service service(registry());
  EXPECT_EQ(service.handle("POST", "/valence", "{not json").status, 400);
  EXPECT_EQ(service.handle("POST", "/valence", "[1,2]").status, 400);
  EXPECT_EQ(service.handle("GET", "/nowhere", "").status, 404);
  EXPECT_EQ(service.handle("GET", "/vocab", "", {{"model", "tiny"}}).status, 200);
  const auto r = service.handle("POST", "/template", R"({"profile":"fixture","bars":4})");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body["api_version"], kApiVersion);
}

TEST(Config, FileAndEnvironment) {
  const auto path = std::filesystem::temp_directory_path() / "leadsheet_service_config.json";
  score::write_text_file(path.string(), R"({"port": 9000, "model_dir": "/srv/models"})");
  auto config = load_service_config(path);
  EXPECT_EQ(config.port, 9000);
  EXPECT_EQ(config.model_dir, "/srv/models");
  EXPECT_EQ(config.host, "127.0.0.1");

  std::map<std::string, std::string> env = {{"LEADSHEET_PORT", "9100"},
                                            {"LEADSHEET_MODEL_DIR", "/tmp/m"}};
  auto lookup = [&](const char* key) -> const char* {
    const auto it = env.find(key);
    return it == env.end() ? nullptr : it->second.c_str();
  };
  apply_environment(config, lookup);
  EXPECT_EQ(config.port, 9100);
  EXPECT_EQ(config.model_dir, "/tmp/m");
  env["LEADSHEET_PORT"] = "http";
  EXPECT_THROW(apply_environment(config, lookup), DataError);

  score::write_text_file(path.string(), R"({"port": "x"})");
  EXPECT_THROW(load_service_config(path), DataError);
  score::write_text_file(path.string(), R"({"port": 70000})");
  EXPECT_THROW(load_service_config(path), DataError);
}

TEST(Registry, LoadsModelsAndProfilesFromADirectory) {
  const auto dir = std::filesystem::temp_directory_path() / "leadsheet_service_models";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto cp = tiny_checkpoint();
  seq2seq::save_checkpoint(dir / "desk.json", *cp.model, cp.encoder_vocab, cp.decoder_vocab);
  score::write_text_file((dir / "train.profile.json").string(),
                         tokenizer::profile_to_json(fixture_profile()).dump());
  score::write_text_file((dir / "broken.json").string(), "{}");
  const auto r = Registry::load(dir);
  EXPECT_NE(r.model("desk"), nullptr);
  EXPECT_NE(r.profile("fixture"), nullptr);
  ASSERT_EQ(r.warnings().size(), 1u);
  EXPECT_NE(r.warnings()[0].find("broken.json"), std::string::npos);
  EXPECT_EQ(Registry::load(dir / "missing").warnings().size(), 1u);
}

// --- HTTP -------------------------------------------------------------------

TEST(Http, EndpointsOverTheWire) {
  const Service service(registry());
  HttpServer server(service, 4);
  const int port = server.start("127.0.0.1", 0);
  httplib::Client client("127.0.0.1", port);

  auto models = client.Get("/models");
  ASSERT_TRUE(models);
  EXPECT_EQ(models->status, 200);
  EXPECT_EQ(json::parse(models->body)["models"][0]["id"], "tiny");

  auto bad = client.Post("/valence", "{oops", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  EXPECT_EQ(json::parse(bad->body)["api_version"], kApiVersion);

  auto missing = client.Get("/nothing/here");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
  EXPECT_EQ(json::parse(missing->body)["error"]["status"], 404);

  auto unknown_model = client.Post("/generate", json{{"model", "x"}, {"bars", bars_of(2)}}.dump(),
                                   "application/json");
  ASSERT_TRUE(unknown_model);
  EXPECT_EQ(unknown_model->status, 404);
  EXPECT_NE(json::parse(unknown_model->body)["error"]["message"].get<std::string>().find("x"),
            std::string::npos);

  auto vocab = client.Get("/vocab?model=tiny");
  ASSERT_TRUE(vocab);
  EXPECT_EQ(vocab->status, 200);

  // Concurrent identical requests get identical answers.
  const std::string body = json{{"model", "tiny"}, {"bars", bars_of(4)}, {"seed", 5}}.dump();
  std::vector<std::string> answers(4);
  std::vector<std::thread> threads;
  for (int i = 0; i < 4; ++i) {
    threads.emplace_back([&, i] {
      httplib::Client c("127.0.0.1", port);
      auto r = c.Post("/generate", body, "application/json");
      if (r && r->status == 200) answers[static_cast<std::size_t>(i)] = r->body;
    });
  }
  for (auto& t : threads) t.join();
  ASSERT_FALSE(answers[0].empty());
  for (const auto& a : answers) EXPECT_EQ(a, answers[0]);
  server.stop();
}

}  // namespace
}  // namespace leadsheet::service
