#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <nlohmann/json.hpp>

#include "leadsheet/affect/valence.h"
#include "leadsheet/cli/cli.h"
#include "leadsheet/cli/manifest.h"
#include "leadsheet/metrics/report.h"
#include "leadsheet/score/corpus_json.h"
#include "leadsheet/score/musicxml.h"
#include "leadsheet/score/normalize.h"
#include "leadsheet/score/synthetic.h"
#include "leadsheet/seq2seq/checkpoint.h"
#include "leadsheet/seq2seq/train.h"
#include "leadsheet/tokenizer/profile.h"

namespace leadsheet::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

// Fresh scratch directory per test.
fs::path scratch() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  const fs::path dir = fs::temp_directory_path() /
                       ("leadsheet_cli_" + std::string(info->test_suite_name()) + "_" + info->name());
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

json read_json(const fs::path& path) { return json::parse(score::read_text_file(path.string())); }

void write_musicxml_dir(const fs::path& dir, const std::vector<score::LeadSheet>& sheets) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < sheets.size(); ++i) {
    score::write_text_file((dir / ("piece" + std::to_string(100 + i) + ".musicxml")).string(),
                           score::write_musicxml(sheets[i]));
  }
}

// A tiny untrained LSTM saved as a checkpoint.
fs::path tiny_model(const fs::path& dir) {
  auto config = seq2seq::ModelConfig::desk(seq2seq::Architecture::kLstm);
  config.embedding = 8;
  config.hidden = 8;
  config.layers = 1;
  const auto encoder = tokenizer::Vocabulary::encoder();
  const auto decoder = tokenizer::Vocabulary::decoder_full();
  auto model = seq2seq::make_model(config, static_cast<int>(encoder.size()),
                                   static_cast<int>(decoder.size()));
  model->initialize(4);
  const fs::path path = dir / "tiny.json";
  seq2seq::save_checkpoint(path, *model, encoder, decoder);
  return path;
}

// --- preprocess -------------------------------------------------------------

TEST(Preprocess, FiveFourPieceIsCountedUnderTimeSignature) {
  const fs::path dir = scratch();
  score::SyntheticOptions opts;
  opts.vary_meter = false;
  auto sheets = score::random_corpus(12, 5, opts);
  for (auto& bar : sheets[3].bars) {
    bar.time_signature = {5, 4};
    bar.events.push_back({bar.events.back().chord, score::Pitch{67}, {24}});
  }
  write_musicxml_dir(dir / "xml", sheets);

  const auto r = run_cli({"preprocess", "--in", (dir / "xml").string(), "--out",
                          (dir / "out" / "corpus.json").string(), "--seed", "1"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const json log = read_json(dir / "out" / "corpus.rejections.json");
  EXPECT_EQ(log.at("counts").at("time signature"), 1);
  EXPECT_EQ(log.at("kept"), 11);
  ASSERT_EQ(log.at("rejected").size(), 1u);
  EXPECT_EQ(log.at("rejected")[0].at("file"), "piece103.musicxml");
  EXPECT_EQ(score::load_corpus((dir / "out" / "corpus.json").string()).size(), 11u);
}

TEST(Preprocess, FiftyFilesSplitFortyFiveFive) {
  const fs::path dir = scratch();
  const auto sheets = score::random_corpus(50, 12);
  write_musicxml_dir(dir / "xml", sheets);
  const auto r = run_cli({"preprocess", "--in", (dir / "xml").string(), "--out",
                          (dir / "corpus.json").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(score::load_corpus((dir / "corpus.json").string()).size(), 50u);
  EXPECT_EQ(score::load_corpus((dir / "corpus.train.json").string()).size(), 40u);
  EXPECT_EQ(score::load_corpus((dir / "corpus.validation.json").string()).size(), 5u);
  EXPECT_EQ(score::load_corpus((dir / "corpus.test.json").string()).size(), 5u);

  // The synthetic sheets are already normalized, so they come back unchanged
  // apart from the source, which becomes the file name.
  auto corpus = score::load_corpus((dir / "corpus.json").string());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    EXPECT_EQ(corpus[i].source, "piece" + std::to_string(100 + i) + ".musicxml");
    corpus[i].source = sheets[i].source;
    EXPECT_EQ(corpus[i], sheets[i]);
  }

  const auto profile = tokenizer::profile_from_json(read_json(dir / "corpus.profile.json"));
  EXPECT_EQ(profile.name, "corpus");
  EXPECT_EQ(profile.pieces, 40u);
}

TEST(Preprocess, RerunGivesIdenticalCorpusHash) {
  const fs::path dir = scratch();
  write_musicxml_dir(dir / "xml", score::random_corpus(20, 13));
  for (const char* run_dir : {"a", "b"}) {
    ASSERT_EQ(run_cli({"preprocess", "--in", (dir / "xml").string(), "--out",
                       (dir / run_dir / "corpus.json").string(), "--seed", "9"})
                  .code,
              kExitOk);
  }
  const json a = read_json(dir / "a" / "corpus.manifest.json");
  const json b = read_json(dir / "b" / "corpus.manifest.json");
  EXPECT_EQ(a.at("corpus_hashes"), b.at("corpus_hashes"));
  EXPECT_EQ(a.at("inputs"), b.at("inputs"));
  ASSERT_EQ(a.at("outputs").size(), b.at("outputs").size());
  for (std::size_t i = 0; i < a.at("outputs").size(); ++i) {
    EXPECT_EQ(a["outputs"][i]["hash"], b["outputs"][i]["hash"]);
  }
  EXPECT_EQ(score::read_text_file((dir / "a" / "corpus.train.json").string()),
            score::read_text_file((dir / "b" / "corpus.train.json").string()));

  // A different seed shuffles the split but not the corpus itself.
  ASSERT_EQ(run_cli({"preprocess", "--in", (dir / "xml").string(), "--out",
                     (dir / "c" / "corpus.json").string(), "--seed", "10"})
                .code,
            kExitOk);
  const json c = read_json(dir / "c" / "corpus.manifest.json");
  EXPECT_EQ(c["corpus_hashes"]["corpus.json"], a["corpus_hashes"]["corpus.json"]);
  EXPECT_NE(c["corpus_hashes"]["corpus.train.json"], a["corpus_hashes"]["corpus.train.json"]);
}

TEST(Preprocess, EmptyOrMissingInputIsADataError) {
  const fs::path dir = scratch();
  fs::create_directories(dir / "empty");
  EXPECT_EQ(run_cli({"preprocess", "--in", (dir / "empty").string(), "--out",
                     (dir / "c.json").string()})
                .code,
            kExitData);
  EXPECT_EQ(run_cli({"preprocess", "--in", (dir / "missing").string(), "--out",
                     (dir / "c.json").string()})
                .code,
            kExitData);
}

TEST(Preprocess, UnparseableFilesAreLoggedNotFatal) {
  const fs::path dir = scratch();
  write_musicxml_dir(dir / "xml", score::random_corpus(3, 14));
  score::write_text_file((dir / "xml" / "broken.xml").string(), "<score-partwise><part>");
  const auto r = run_cli({"preprocess", "--in", (dir / "xml").string(), "--out",
                          (dir / "corpus.json").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const json log = read_json(dir / "corpus.rejections.json");
  EXPECT_EQ(log.at("counts").at("parse error"), 1);
  EXPECT_EQ(log.at("kept"), 3);
  EXPECT_FALSE(fs::exists(dir / "corpus.train.json"));  // too few sheets to split
  EXPECT_TRUE(fs::exists(dir / "corpus.profile.json"));
}

// --- train ------------------------------------------------------------------

TEST(Train, DeskPresetOverfitsAToyCorpus) {
  const fs::path dir = scratch();
  score::SyntheticOptions opts;
  opts.min_bars = 4;
  opts.max_bars = 4;
  const auto toy = score::random_corpus(2, 3, opts);
  score::save_corpus((dir / "toy.json").string(), toy);

  const auto r = run_cli({"train", "--preset", "desk", "--corpus", (dir / "toy.json").string(),
                          "--out", (dir / "model.json").string(), "--epochs", "150", "--lr",
                          "0.005", "--batch-size", "1", "--target-loss", "0.05", "--seed", "2"});
  ASSERT_EQ(r.code, kExitOk) << r.err;

  // Loss log: the per-epoch training loss falls block by block.
  std::istringstream log(score::read_text_file((dir / "model.loss.csv").string()));
  std::string line;
  std::getline(log, line);
  EXPECT_EQ(line, "epoch,loss,grad_norm,eval_loss");
  std::vector<double> losses;
  std::vector<double> eval_losses;
  while (std::getline(log, line)) {
    std::istringstream fields(line);
    std::string epoch, loss, grad, eval;
    std::getline(fields, epoch, ',');
    std::getline(fields, loss, ',');
    std::getline(fields, grad, ',');
    std::getline(fields, eval, ',');
    losses.push_back(std::stod(loss));
    eval_losses.push_back(std::stod(eval));
  }
  ASSERT_GE(losses.size(), 20u);
  const std::size_t block = losses.size() / 5;
  double previous = 1e300;
  for (std::size_t b = 0; b < 5; ++b) {
    double sum = 0;
    for (std::size_t i = b * block; i < (b + 1) * block; ++i) sum += losses[i];
    EXPECT_LT(sum / block, previous) << "block " << b;
    previous = sum / block;
  }
  EXPECT_LT(losses.back(), losses.front() / 10);

  // Oracle: reload the checkpoint and score the toy corpus from scratch.
  const auto cp = seq2seq::load_checkpoint(dir / "model.json");
  EXPECT_EQ(cp.model->config(), seq2seq::ModelConfig::desk(seq2seq::Architecture::kLstm));
  const auto pairs = seq2seq::make_pairs(toy, cp.encoder_vocab, cp.decoder_vocab);
  const double loss = seq2seq::evaluate_loss(*cp.model, pairs);
  EXPECT_LT(loss, 0.1);
  EXPECT_NEAR(loss, eval_losses.back(), 1e-6 * loss);
  EXPECT_EQ(cp.metadata.at("pieces"), 2);
  EXPECT_TRUE(cp.metadata.at("reached_target").get<bool>());

  const json manifest = read_json(dir / "model.manifest.json");
  EXPECT_EQ(manifest.at("command"), "train");
  EXPECT_EQ(manifest.at("seeds").at("seed"), 2);
  EXPECT_EQ(manifest.at("outputs").size(), 2u);
  EXPECT_EQ(manifest.at("config").at("preset"), "desk");
}

TEST(Train, UnknownPresetIsAUsageError) {
  const fs::path dir = scratch();
  score::save_corpus((dir / "toy.json").string(), score::random_corpus(2, 3));
  EXPECT_EQ(run_cli({"train", "--preset", "huge", "--corpus", (dir / "toy.json").string(), "--out",
                     (dir / "m.json").string()})
                .code,
            kExitUsage);
  EXPECT_EQ(run_cli({"train", "--corpus", (dir / "toy.json").string(), "--out",
                     (dir / "m.json").string(), "--lr", "-1"})
                .code,
            kExitUsage);
}

// --- generate ---------------------------------------------------------------

TEST(Generate, EightBarsGiveMusicXmlAndJson) {
  const fs::path dir = scratch();
  const fs::path model = tiny_model(dir);
  const auto r = run_cli({"generate", "--model", model.string(), "--bars", "8", "--valence",
                          "High", "--timesig", "4/4", "--density", "medium", "--out",
                          (dir / "gen").string(), "--seed", "11"});
  ASSERT_EQ(r.code, kExitOk) << r.err;

  const auto sheets = score::load_corpus((dir / "gen.json").string());
  ASSERT_EQ(sheets.size(), 1u);
  ASSERT_EQ(sheets[0].bars.size(), 8u);
  EXPECT_TRUE(std::holds_alternative<score::LeadSheet>(score::filter_instance(sheets[0])));

  const auto raw = score::parse_musicxml(score::read_text_file((dir / "gen.musicxml").string()));
  const auto unfolded = score::unfold_and_split(score::transpose_to_c(raw));
  ASSERT_EQ(unfolded.sheets.size(), 1u);
  EXPECT_EQ(unfolded.sheets[0].bars.size(), 8u);
  for (const auto& bar : unfolded.sheets[0].bars) {
    EXPECT_EQ(bar.filled_ticks(), bar.time_signature.bar_ticks());
  }

  const json doc = read_json(dir / "gen.json");
  ASSERT_EQ(doc.at("conditions").size(), 8u);
  EXPECT_EQ(doc["conditions"][0].at("valence"), "High");
  EXPECT_EQ(doc["conditions"][0].at("grouping"), "first1");
  EXPECT_EQ(doc["conditions"][7].at("grouping"), "last1");
  EXPECT_EQ(doc.at("generations")[0].at("seed"), 11);
}

TEST(Generate, SameSeedSameOutputAndCountWritesOneFilePerPiece) {
  const fs::path dir = scratch();
  const fs::path model = tiny_model(dir);
  for (const char* prefix : {"a", "b"}) {
    ASSERT_EQ(run_cli({"generate", "--model", model.string(), "--bars", "4", "--count", "3",
                       "--out", (dir / prefix).string(), "--seed", "5"})
                  .code,
              kExitOk);
  }
  EXPECT_EQ(score::read_text_file((dir / "a.json").string()),
            score::read_text_file((dir / "b.json").string()));
  for (const char* name : {"a-001.musicxml", "a-002.musicxml", "a-003.musicxml"}) {
    EXPECT_TRUE(fs::exists(dir / name)) << name;
  }
  EXPECT_NE(score::read_text_file((dir / "a-001.musicxml").string()),
            score::read_text_file((dir / "a-002.musicxml").string()));
}

TEST(Generate, ConditionsFileAndBadConditions) {
  const fs::path dir = scratch();
  const fs::path model = tiny_model(dir);
  json bars = json::array();
  for (const char* ts : {"3/4", "3/4", "6/8", "6/8"}) {
    bars.push_back({{"time_signature", ts}, {"valence", "Low"}, {"density", "low"}});
  }
  score::write_text_file((dir / "conditions.json").string(), json{{"bars", bars}}.dump());
  ASSERT_EQ(run_cli({"generate", "--model", model.string(), "--conditions",
                     (dir / "conditions.json").string(), "--out", (dir / "gen").string()})
                .code,
            kExitOk);
  const auto sheet = score::load_corpus((dir / "gen.json").string()).at(0);
  ASSERT_EQ(sheet.bars.size(), 4u);
  EXPECT_EQ(sheet.bars[2].time_signature, (score::TimeSignature{6, 8}));

  EXPECT_EQ(run_cli({"generate", "--model", model.string(), "--valence", "Happy", "--out",
                     (dir / "x").string()})
                .code,
            kExitUsage);
  EXPECT_EQ(run_cli({"generate", "--model", (dir / "none.json").string(), "--out",
                     (dir / "x").string()})
                .code,
            kExitData);
}

// --- evaluate ---------------------------------------------------------------

TEST(Evaluate, PrintsTheMetricTable) {
  const fs::path dir = scratch();
  const auto test = score::random_corpus(6, 21);
  const auto gen = score::random_corpus(4, 22);
  score::save_corpus((dir / "test.json").string(), test);
  score::save_corpus((dir / "gen.json").string(), gen);
  const auto r = run_cli({"evaluate", "--corpus", (dir / "test.json").string(), "--corpus",
                          (dir / "gen.json").string(), "--label", "Training Dataset", "--label",
                          "Generated", "--out", (dir / "report.json").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto expected =
      metrics::corpus_report(test, gen, "Training Dataset", "Generated");
  EXPECT_EQ(r.out, metrics::render_text(expected));

  std::istringstream lines(r.out);
  std::string line;
  std::vector<std::string> labels;
  while (std::getline(lines, line)) labels.push_back(line.substr(0, line.find("  ")));
  const std::vector<std::string> layout = {"Metric",
                                           "Pieces",
                                           "Used Pitch Classes: Melody",
                                           "Used Pitch Classes: Chords",
                                           "Rest Events (%): Melody",
                                           "Rest Events (%): Chords",
                                           "Tonal Distance: Melody - Chords",
                                           "Pattern Metrics: Compression Ratio",
                                           "Pattern Metrics: Long Patterns (avg)",
                                           "Pattern Metrics: Short Patterns (avg)",
                                           "Tension Metrics: Cloud Movement",
                                           "Tension Metrics: Cloud Diameter",
                                           "Tension Metrics: Distance to the Key"};
  EXPECT_EQ(labels, layout);

  const auto stored = metrics::report_from_json(read_json(dir / "report.json"));
  ASSERT_EQ(stored.size(), 2u);
  EXPECT_EQ(stored[1].label, "Generated");
  EXPECT_EQ(stored[1].pieces, 4u);
}

TEST(Evaluate, LabelsDefaultToFileNamesAndMustMatchInCount) {
  const fs::path dir = scratch();
  score::save_corpus((dir / "mine.json").string(), score::random_corpus(2, 23));
  const auto r = run_cli({"--workspace", dir.string(), "evaluate", "--corpus", "mine.json"});
  ASSERT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("mine"), std::string::npos);
  const json manifest = read_json(dir / "evaluate.manifest.json");
  EXPECT_EQ(manifest.at("config").at("label"), json::array());
  EXPECT_EQ(run_cli({"evaluate", "--corpus", (dir / "mine.json").string(), "--label", "a",
                     "--label", "b"})
                .code,
            kExitUsage);
}

// --- valence ----------------------------------------------------------------

TEST(Valence, AnnotatesEveryBarAndThePiece) {
  const fs::path dir = scratch();
  const auto corpus = score::random_corpus(5, 24);
  score::save_corpus((dir / "in.json").string(), corpus);
  ASSERT_EQ(run_cli({"valence", "--in", (dir / "in.json").string(), "--out",
                     (dir / "out.json").string()})
                .code,
            kExitOk);
  const json doc = read_json(dir / "out.json");
  EXPECT_EQ(score::corpus_from_json(doc), corpus);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const json& v = doc["sheets"][i].at("valence");
    ASSERT_EQ(v.at("bars").size(), corpus[i].bars.size());
    const auto p = affect::piece_valence(corpus[i]);
    EXPECT_DOUBLE_EQ(v.at("piece").at("value").get<double>(), p.value);
    EXPECT_EQ(v.at("piece").at("descriptor"), affect::descriptor_name(p.descriptor));
    for (std::size_t b = 0; b < corpus[i].bars.size(); ++b) {
      const auto bv = affect::bar_valence(corpus[i].bars[b]);
      if (bv) EXPECT_DOUBLE_EQ(v["bars"][b].at("value").get<double>(), *bv);
    }
  }
}

// --- shared flags -----------------------------------------------------------

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli({}).code, kExitUsage);
  EXPECT_EQ(run_cli({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(run_cli({"evaluate"}).code, kExitUsage);
  EXPECT_EQ(run_cli({"evaluate", "--corpus", "x.json", "--bogus"}).code, kExitUsage);
  EXPECT_EQ(run_cli({"--help"}).code, kExitOk);
  EXPECT_EQ(run_cli({"evaluate", "--corpus", "/nonexistent/x.json"}).code, kExitData);
}

TEST(Cli, ConfigFileSuppliesDefaultsAndFlagsWin) {
  const fs::path dir = scratch();
  score::write_text_file((dir / "synth.json").string(),
                         json{{"count", 3}, {"max_bars", 5}, {"seed", 8}}.dump());
  ASSERT_EQ(run_cli({"synth", "--config", (dir / "synth.json").string(), "--out",
                     (dir / "a.json").string()})
                .code,
            kExitOk);
  EXPECT_EQ(score::load_corpus((dir / "a.json").string()).size(), 3u);
  ASSERT_EQ(run_cli({"synth", "--config", (dir / "synth.json").string(), "--count", "4", "--out",
                     (dir / "b.json").string()})
                .code,
            kExitOk);
  const auto b = score::load_corpus((dir / "b.json").string());
  ASSERT_EQ(b.size(), 4u);
  for (const auto& s : b) EXPECT_LE(s.bars.size(), 5u);

  const json manifest = read_json(dir / "b.manifest.json");
  EXPECT_EQ(manifest.at("config").at("count"), "4");
  EXPECT_EQ(manifest.at("config").at("max_bars"), "5");
  EXPECT_EQ(manifest.at("seeds").at("seed"), 8);

  // Feeding a manifest's config back reproduces the run.
  score::write_text_file((dir / "again.json").string(), manifest.at("config").dump());
  ASSERT_EQ(run_cli({"synth", "--config", (dir / "again.json").string(), "--seed", "8", "--out",
                     (dir / "c.json").string()})
                .code,
            kExitOk);
  EXPECT_EQ(score::read_text_file((dir / "c.json").string()),
            score::read_text_file((dir / "b.json").string()));

  score::write_text_file((dir / "bad.json").string(), "[1, 2]");
  EXPECT_EQ(run_cli({"synth", "--config", (dir / "bad.json").string(), "--out",
                     (dir / "d.json").string()})
                .code,
            kExitData);
  score::write_text_file((dir / "unknown.json").string(), json{{"colour", "red"}}.dump());
  EXPECT_EQ(run_cli({"synth", "--config", (dir / "unknown.json").string(), "--out",
                     (dir / "d.json").string()})
                .code,
            kExitUsage);
}

TEST(Cli, WorkspaceRootsRelativePaths) {
  const fs::path dir = scratch();
  ASSERT_EQ(run_cli({"--workspace", dir.string(), "synth", "--count", "2", "--out",
                     "data/corpus.json"})
                .code,
            kExitOk);
  EXPECT_TRUE(fs::exists(dir / "data" / "corpus.json"));
  EXPECT_TRUE(fs::exists(dir / "data" / "corpus.manifest.json"));
}

TEST(Cli, ManifestHashesMatchTheFiles) {
  const fs::path dir = scratch();
  ASSERT_EQ(run_cli({"synth", "--count", "3", "--out", (dir / "s.json").string(), "--manifest",
                     (dir / "run.json").string()})
                .code,
            kExitOk);
  const json m = read_json(dir / "run.json");
  ASSERT_EQ(m.at("outputs").size(), 1u);
  EXPECT_EQ(m["outputs"][0].at("hash"), path_hash(dir / "s.json"));
  EXPECT_GE(m.at("timings").at("seconds").get<double>(), 0.0);
  EXPECT_FALSE(fs::exists(dir / "s.manifest.json"));
}

TEST(Serve, EnvironmentSitsBetweenFileAndFlags) {
  const fs::path dir = scratch();
  tiny_model(dir);
  score::write_text_file((dir / "service.json").string(),
                         json{{"port", 9000}, {"host", "0.0.0.0"}, {"model_dir", dir.string()}}.dump());
  auto dry_run = [&](std::vector<std::string> extra) {
    std::vector<std::string> args = {"serve", "--config", (dir / "service.json").string(),
                                     "--dry-run", "--manifest", (dir / "serve.json").string()};
    args.insert(args.end(), extra.begin(), extra.end());
    const auto r = run_cli(args);
    EXPECT_EQ(r.code, kExitOk) << r.err;
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "1 models, 0 profiles from " + dir.string());
    return json::parse(r.out.substr(r.out.find('\n') + 1));
  };
  EXPECT_EQ(dry_run({}).at("port"), 9000);
  setenv("LEADSHEET_PORT", "9100", 1);
  EXPECT_EQ(dry_run({}).at("port"), 9100);
  EXPECT_EQ(dry_run({"--port", "9200"}).at("port"), 9200);
  unsetenv("LEADSHEET_PORT");
  EXPECT_EQ(dry_run({}).at("host"), "0.0.0.0");
}

}  // namespace
}  // namespace leadsheet::cli
