#include "commands.h"

#include <algorithm>
#include <cctype>
#include <exception>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "leadsheet/affect/valence.h"
#include "leadsheet/error.h"
#include "leadsheet/hash.h"
#include "leadsheet/metrics/report.h"
#include "leadsheet/score/corpus_json.h"
#include "leadsheet/score/musicxml.h"
#include "leadsheet/score/normalize.h"
#include "leadsheet/score/synthetic.h"
#include "leadsheet/seq2seq/checkpoint.h"
#include "leadsheet/seq2seq/generate.h"
#include "leadsheet/seq2seq/train.h"
#include "leadsheet/service/service.h"
#include "leadsheet/tokenizer/profile.h"

namespace leadsheet::cli {

using nlohmann::json;

fs::path sibling(const fs::path& path, const std::string& suffix) {
  return path.parent_path() / (path.stem().string() + suffix);
}

namespace {

std::string corpus_hash(const std::vector<score::LeadSheet>& sheets) {
  return hex64(fnv1a64(score::dump_corpus(sheets)));
}

void write_json(const fs::path& path, const json& j, RunManifest& manifest) {
  score::write_text_file(path.string(), j.dump(1) + "\n");
  manifest.add_output(path);
}

void write_corpus(const fs::path& path, const std::vector<score::LeadSheet>& sheets,
                  RunManifest& manifest) {
  score::save_corpus(path.string(), sheets);
  manifest.add_output(path);
  manifest.add_corpus_hash(path.filename().string(), corpus_hash(sheets));
}

std::vector<score::LeadSheet> read_corpus(const fs::path& path, RunManifest& manifest) {
  auto sheets = score::load_corpus(path.string());
  manifest.add_input(path);
  manifest.add_corpus_hash(path.filename().string(), corpus_hash(sheets));
  return sheets;
}

// --- preprocess -------------------------------------------------------------

bool is_musicxml(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".xml" || ext == ".musicxml";
}

struct FileOutcome {
  int instances = 0;
  std::vector<score::LeadSheet> kept;
  std::vector<json> rejected;
};

FileOutcome process_file(const fs::path& path) {
  FileOutcome o;
  const std::string name = path.filename().string();
  auto reject = [&](std::string_view reason, const std::string& detail) {
    o.rejected.push_back({{"file", name}, {"reason", reason}, {"detail", detail}});
  };
  try {
    auto unfolded = score::unfold_and_split(score::transpose_to_c(score::read_musicxml_file(path.string())));
    for (const auto& d : unfolded.discarded) {
      ++o.instances;
      reject(score::reject_reason_name(score::RejectReason::kBarCount), d.reason);
    }
    for (auto& sheet : unfolded.sheets) {
      ++o.instances;
      if (sheet.source.empty()) sheet.source = name;
      auto result = score::filter_instance(sheet);
      if (auto* kept = std::get_if<score::LeadSheet>(&result)) {
        o.kept.push_back(std::move(*kept));
      } else {
        const auto& r = std::get<score::Rejection>(result);
        reject(score::reject_reason_name(r.reason), r.detail);
      }
    }
  } catch (const ParseError& e) {
    reject("parse error", e.what());
  } catch (const UnusableSourceError& e) {
    reject("unusable source", e.what());
  } catch (const DataError& e) {
    reject("unusable data", e.what());
  }
  return o;
}

// --- generate ---------------------------------------------------------------

tokenizer::ConditionTrack track_from_options(const GenerateOptions& o, RunManifest& manifest) {
  if (o.conditions) {
    json j;
    try {
      j = json::parse(score::read_text_file(o.conditions->string()));
    } catch (const json::parse_error& e) {
      throw DataError(o.conditions->string() + ": " + e.what());
    }
    manifest.add_input(*o.conditions);
    return service::conditions_from_json(j.is_object() && j.contains("bars") ? j.at("bars") : j);
  }
  if (o.bars < 1 || o.bars > score::kMaxBars) {
    throw InvalidArgument("--bars must be in 1.." + std::to_string(score::kMaxBars));
  }
  json bars = json::array();
  for (int i = 0; i < o.bars; ++i) {
    bars.push_back({{"time_signature", o.time_signature},
                    {"grouping", o.grouping},
                    {"valence", o.valence},
                    {"density", o.density}});
  }
  try {
    return service::conditions_from_json(bars);
  } catch (const DataError& e) {
    throw InvalidArgument(e.what());
  }
}

std::string describe_valence(const score::LeadSheet& sheet) {
  try {
    const auto v = affect::piece_valence(sheet);
    std::ostringstream s;
    s << affect::descriptor_name(v.descriptor) << " (" << std::fixed << std::setprecision(3)
      << v.value << ")";
    return s.str();
  } catch (const InvalidArgument&) {
    return "undefined";
  }
}

}  // namespace

fs::path run_preprocess(const PreprocessOptions& o, RunManifest& manifest, std::ostream& out,
                        std::ostream& err) {
  if (!fs::is_directory(o.in)) throw DataError("input directory " + o.in.string() + " does not exist");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(o.in)) {
    if (entry.is_regular_file() && is_musicxml(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("no MusicXML files in " + o.in.string());
  manifest.add_input(o.in);

  std::vector<FileOutcome> outcomes(files.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(files.size()); ++i) {
    try {
      outcomes[static_cast<std::size_t>(i)] = process_file(files[static_cast<std::size_t>(i)]);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<score::LeadSheet> corpus;
  json entries = json::array();
  std::map<std::string, std::size_t> counts;
  for (auto r : {score::RejectReason::kBarCount, score::RejectReason::kTimeSignature,
                 score::RejectReason::kChordQuality, score::RejectReason::kDuration,
                 score::RejectReason::kMelodyRange, score::RejectReason::kBarCapacity}) {
    counts[std::string(score::reject_reason_name(r))] = 0;
  }
  int instances = 0;
  for (auto& outcome : outcomes) {
    instances += outcome.instances;
    for (auto& sheet : outcome.kept) corpus.push_back(std::move(sheet));
    for (auto& entry : outcome.rejected) {
      ++counts[entry.at("reason").get<std::string>()];
      entries.push_back(std::move(entry));
    }
  }

  write_json(sibling(o.out, ".rejections.json"),
             {{"format", "leadsheet-rejections"},
              {"version", 1},
              {"files", files.size()},
              {"instances", instances},
              {"kept", corpus.size()},
              {"counts", counts},
              {"rejected", entries}},
             manifest);
  out << "files " << files.size() << ", instances " << instances << ", kept " << corpus.size()
      << ", rejected " << entries.size() << "\n";
  for (const auto& [reason, n] : counts) {
    if (n > 0) out << "  " << reason << ": " << n << "\n";
  }
  if (corpus.empty()) throw DataError("no usable lead sheets in " + o.in.string());

  write_corpus(o.out, corpus, manifest);
  const std::vector<score::LeadSheet>* profile_source = &corpus;
  score::DatasetSplit split;
  if (corpus.size() >= 10) {
    split = score::split_dataset(corpus, o.seed);
    write_corpus(sibling(o.out, ".train.json"), split.train, manifest);
    write_corpus(sibling(o.out, ".validation.json"), split.validation, manifest);
    write_corpus(sibling(o.out, ".test.json"), split.test, manifest);
    profile_source = &split.train;
    out << "split " << split.train.size() << "/" << split.validation.size() << "/"
        << split.test.size() << "\n";
  } else {
    err << "fewer than 10 sheets; no train/validation/test split written\n";
  }
  write_json(sibling(o.out, ".profile.json"),
             tokenizer::profile_to_json(tokenizer::profile_of(*profile_source, o.out.stem().string())),
             manifest);
  return manifest_path_for(o.out);
}

fs::path run_train(const TrainOptions& o, RunManifest& manifest, std::ostream& out,
                   std::ostream& err) {
  const auto arch = seq2seq::architecture_from_name(o.arch);
  if (!arch) throw InvalidArgument("unknown architecture \"" + o.arch + "\"");
  seq2seq::ModelConfig mc;
  if (o.preset == "desk") {
    mc = seq2seq::ModelConfig::desk(*arch);
  } else if (o.preset == "full") {
    mc = seq2seq::ModelConfig::full(*arch);
  } else {
    throw InvalidArgument("unknown preset \"" + o.preset + "\"");
  }
  if (o.embedding) mc.embedding = *o.embedding;
  if (o.hidden) mc.hidden = *o.hidden;
  if (o.layers) mc.layers = *o.layers;
  if (o.heads) mc.heads = *o.heads;
  if (o.feed_forward) mc.feed_forward = *o.feed_forward;
  if (o.dropout) mc.dropout = *o.dropout;
  if (o.max_length) mc.max_length = *o.max_length;
  mc.validate();

  seq2seq::TrainConfig tc;
  tc.seed = o.seed;
  if (o.epochs) tc.epochs = *o.epochs;
  if (o.learning_rate) tc.learning_rate = *o.learning_rate;
  if (o.batch_size) tc.batch_size = *o.batch_size;
  if (o.clip_norm) tc.clip_norm = *o.clip_norm;
  if (o.warmup_steps) tc.warmup_steps = *o.warmup_steps;
  tc.target_loss = o.target_loss;
  tc.validate();

  const auto corpus = read_corpus(o.corpus, manifest);
  if (corpus.empty()) throw DataError(o.corpus.string() + " holds no sheets");
  const auto encoder = tokenizer::Vocabulary::encoder();
  const auto decoder = tokenizer::Vocabulary::decoder_full();
  const auto pairs = seq2seq::make_pairs(corpus, encoder, decoder);
  std::vector<seq2seq::TrainingPair> validation;
  if (o.validation) validation = seq2seq::make_pairs(read_corpus(*o.validation, manifest), encoder, decoder);

  auto model = seq2seq::make_model(mc, static_cast<int>(encoder.size()),
                                   static_cast<int>(decoder.size()));
  model->initialize(o.seed);
  err << "training " << o.arch << " (" << o.preset << ", " << model->parameters().count()
      << " parameters) on " << pairs.size() << " sheets\n";

  std::ostringstream log;
  log << "epoch,loss,grad_norm,eval_loss\n";
  log << std::setprecision(9);
  const auto result = seq2seq::train(*model, pairs, tc, [&](const seq2seq::EpochReport& r) {
    log << r.epoch << "," << r.loss << "," << r.grad_norm << ",";
    if (r.eval_loss) log << *r.eval_loss;
    log << "\n";
    err << "epoch " << r.epoch << "/" << tc.epochs << " loss " << r.loss << "\n";
  });

  json metadata = {{"preset", o.preset},
                   {"train", tc.to_json()},
                   {"corpus", o.corpus.generic_string()},
                   {"corpus_hash", corpus_hash(corpus)},
                   {"pieces", corpus.size()},
                   {"epochs_run", result.loss_history.size()},
                   {"final_loss", result.loss_history.empty() ? json(nullptr)
                                                              : json(result.loss_history.back())},
                   {"reached_target", result.reached_target}};
  if (!validation.empty()) {
    const double v = seq2seq::evaluate_loss(*model, validation);
    metadata["validation_loss"] = v;
    out << "validation loss " << v << "\n";
  }
  seq2seq::save_checkpoint(o.out, *model, encoder, decoder, metadata);
  manifest.add_output(o.out);
  const fs::path log_path = sibling(o.out, ".loss.csv");
  score::write_text_file(log_path.string(), log.str());
  manifest.add_output(log_path);
  out << "epochs " << result.loss_history.size() << ", final loss "
      << (result.loss_history.empty() ? 0.0 : result.loss_history.back()) << "\n";
  return manifest_path_for(o.out);
}

fs::path run_generate(const GenerateOptions& o, RunManifest& manifest, std::ostream& out,
                      std::ostream&) {
  if (o.count < 1) throw InvalidArgument("--count must be at least 1");
  const auto track = track_from_options(o, manifest);
  const auto checkpoint = seq2seq::load_checkpoint(o.model);
  manifest.add_input(o.model);

  seq2seq::SamplerConfig sampler;
  sampler.temperature = o.temperature;
  sampler.min_temperature = o.min_temperature;
  sampler.max_temperature = o.max_temperature;
  sampler.greedy = o.greedy;
  sampler.max_length = o.max_length.value_or(checkpoint.model->config().max_length);
  sampler.validate();

  std::vector<score::LeadSheet> sheets;
  json generations = json::array();
  for (int i = 0; i < o.count; ++i) {
    sampler.seed = o.seed + static_cast<std::uint64_t>(i);
    const auto gen = seq2seq::generate(*checkpoint.model, track, checkpoint.encoder_vocab,
                                       checkpoint.decoder_vocab, sampler);
    json tokens = json::array();
    for (int id : gen.tokens.ids) tokens.push_back(checkpoint.decoder_vocab.text(id));
    generations.push_back({{"seed", sampler.seed}, {"temperature", gen.temperature}, {"tokens", tokens}});
    out << "piece " << i + 1 << ": " << gen.sheet.bars.size() << " bars, " << gen.sheet.event_count()
        << " events, valence " << describe_valence(gen.sheet) << "\n";
    sheets.push_back(gen.sheet);
  }

  const fs::path json_path = sibling(o.out, ".json");
  json doc = score::corpus_to_json(sheets);
  doc["conditions"] = json::array();
  for (const auto& c : track) doc["conditions"].push_back(service::condition_to_json(c));
  doc["generations"] = generations;
  write_json(json_path, doc, manifest);
  manifest.add_corpus_hash(json_path.filename().string(), corpus_hash(sheets));
  for (int i = 0; i < o.count; ++i) {
    std::string suffix = ".musicxml";
    if (o.count > 1) {
      std::ostringstream s;
      s << "-" << std::setw(3) << std::setfill('0') << i + 1 << ".musicxml";
      suffix = s.str();
    }
    const fs::path xml = sibling(o.out, suffix);
    score::write_text_file(xml.string(), score::write_musicxml(sheets[static_cast<std::size_t>(i)]));
    manifest.add_output(xml);
  }
  return manifest_path_for(json_path);
}

fs::path run_evaluate(const EvaluateOptions& o, RunManifest& manifest, std::ostream& out,
                      std::ostream&) {
  if (o.corpora.empty()) throw InvalidArgument("give at least one --corpus");
  if (!o.labels.empty() && o.labels.size() != o.corpora.size()) {
    throw InvalidArgument("give one --label per --corpus");
  }
  std::vector<metrics::MetricReport> reports;
  for (std::size_t i = 0; i < o.corpora.size(); ++i) {
    const auto corpus = read_corpus(o.corpora[i], manifest);
    const std::string label = o.labels.empty() ? o.corpora[i].stem().string() : o.labels[i];
    if (corpus.empty()) throw DataError(o.corpora[i].string() + " holds no sheets");
    reports.push_back(metrics::evaluate_corpus(label, corpus));
  }
  out << metrics::render_text(reports);
  if (!o.out) return "evaluate.manifest.json";
  write_json(*o.out, metrics::report_to_json(reports), manifest);
  return manifest_path_for(*o.out);
}

fs::path run_valence(const ValenceOptions& o, RunManifest& manifest, std::ostream& out,
                     std::ostream&) {
  const auto table = o.table ? affect::ChordValenceTable::from_file(o.table->string())
                             : affect::ChordValenceTable::builtin();
  if (o.table) manifest.add_input(*o.table);
  const auto corpus = read_corpus(o.in, manifest);
  json doc = score::corpus_to_json(corpus);
  std::map<std::string, std::size_t> pieces;
  std::size_t undefined = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& sheet = corpus[i];
    const auto descriptors = affect::bar_descriptors(sheet, table);
    json bars = json::array();
    for (std::size_t b = 0; b < sheet.bars.size(); ++b) {
      const auto v = affect::bar_valence(sheet.bars[b], table);
      bars.push_back({{"value", v ? json(*v) : json(nullptr)},
                      {"descriptor", affect::descriptor_name(descriptors[b])}});
    }
    json annotation = {{"bars", bars}};
    try {
      const auto p = affect::piece_valence(sheet, table);
      annotation["piece"] = {{"value", p.value}, {"descriptor", affect::descriptor_name(p.descriptor)}};
      ++pieces[std::string(affect::descriptor_name(p.descriptor))];
    } catch (const InvalidArgument&) {
      annotation["piece"] = nullptr;
      ++undefined;
    }
    doc["sheets"][i]["valence"] = annotation;
  }
  write_json(o.out, doc, manifest);
  for (auto d : affect::kAllDescriptors) {
    const std::string name(affect::descriptor_name(d));
    out << name << ": " << (pieces.count(name) ? pieces[name] : 0) << "\n";
  }
  if (undefined > 0) out << "no harmony: " << undefined << "\n";
  return manifest_path_for(o.out);
}

fs::path run_synth(const SynthOptions& o, RunManifest& manifest, std::ostream& out,
                   std::ostream&) {
  if (o.count < 1) throw InvalidArgument("--count must be at least 1");
  score::SyntheticOptions options;
  options.min_bars = o.min_bars;
  options.max_bars = o.max_bars;
  if (o.min_bars < score::kMinBars || o.max_bars > score::kMaxBars || o.min_bars > o.max_bars) {
    throw InvalidArgument("bar range must lie within " + std::to_string(score::kMinBars) + ".." +
                          std::to_string(score::kMaxBars));
  }
  auto sheets = score::random_corpus(o.count, o.seed, options);
  for (std::size_t i = 0; i < sheets.size(); ++i) {
    std::ostringstream name;
    name << "synthetic-" << std::setw(3) << std::setfill('0') << i + 1;
    sheets[i].title = name.str();
  }
  write_corpus(o.out, sheets, manifest);
  if (o.musicxml_dir) {
    fs::create_directories(*o.musicxml_dir);
    for (const auto& sheet : sheets) {
      const fs::path path = *o.musicxml_dir / (sheet.title + ".musicxml");
      score::write_text_file(path.string(), score::write_musicxml(sheet));
      manifest.add_output(path);
    }
  }
  out << sheets.size() << " sheets\n";
  return manifest_path_for(o.out);
}

}  // namespace leadsheet::cli
