#include "leadsheet/cli/cli.h"

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <memory>
#include <ostream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "commands.h"
#include "leadsheet/error.h"
#include "leadsheet/score/corpus_json.h"
#include "leadsheet/service/service.h"

namespace leadsheet::cli {

using nlohmann::json;

namespace {

std::atomic<bool> g_stop_requested{false};

extern "C" void request_stop(int) { g_stop_requested = true; }

std::optional<std::string> flag_value(const std::vector<std::string>& args, const std::string& flag) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == flag && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind(flag + "=", 0) == 0) return args[i].substr(flag.size() + 1);
  }
  return std::nullopt;
}

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& a : args) {
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  }
  return false;
}

fs::path resolve(const fs::path& workspace, const fs::path& p) {
  if (p.empty() || p.is_absolute() || workspace == ".") return p;
  return workspace / p;
}

// Creates the directory an output goes into, so a long run cannot fail only
// when it saves.
void prepare_output(const fs::path& path) {
  const fs::path dir = path.parent_path();
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
}

std::string scalar_text(const std::string& key, const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number() || v.is_boolean()) return v.dump();
  throw DataError("config key \"" + key + "\" must be a string, number, boolean or array of them");
}

// Appends "--key value" for every config entry whose flag is not already on
// the command line.
std::vector<std::string> with_config_defaults(std::vector<std::string> args,
                                              const fs::path& workspace) {
  if (args.empty() || args[0] == "serve") return args;
  const auto file = flag_value(args, "--config");
  if (!file) return args;
  const fs::path path = resolve(workspace, *file);
  json config;
  try {
    config = json::parse(score::read_text_file(path.string()));
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  if (!config.is_object()) throw DataError(path.string() + ": config must be a JSON object");
  std::vector<std::string> extra;
  for (const auto& [key, value] : config.items()) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    if (flag == "--config" || flag == "--manifest" || has_flag(args, flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) extra.push_back(flag);
    } else if (value.is_array()) {
      for (const auto& item : value) {
        extra.push_back(flag);
        extra.push_back(scalar_text(key, item));
      }
    } else if (!value.is_null()) {
      extra.push_back(flag);
      extra.push_back(scalar_text(key, value));
    }
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

// The resolved option values of a subcommand, in config-file form.
json config_snapshot(const CLI::App& sub) {
  json j = json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_name(false, true);
    if (name.rfind("--", 0) != 0 || name == "--help" || name == "--config" || name == "--manifest") {
      continue;
    }
    std::string key = name.substr(2);
    std::replace(key.begin(), key.end(), '-', '_');
    if (opt->get_expected_min() == 0) {
      j[key] = opt->count() > 0;
    } else if (opt->count() > 0) {
      const auto& results = opt->results();
      j[key] = opt->get_expected_max() > 1 ? json(results) : json(results.back());
    } else if (opt->get_expected_max() > 1) {
      j[key] = json::array();
    } else if (!opt->get_default_str().empty()) {
      j[key] = opt->get_default_str();
    }
  }
  return j;
}

int serve(const CLI::App& sub, service::ServiceConfig flags, const std::optional<fs::path>& config_file,
          bool dry_run, RunManifest& manifest, const fs::path& manifest_path, std::ostream& out,
          std::ostream& err) {
  service::ServiceConfig config;
  if (config_file) {
    config = service::load_service_config(*config_file);
    manifest.add_input(*config_file);
  }
  service::apply_environment(config, [](const char* name) { return std::getenv(name); });
  if (sub.count("--host") > 0) config.host = flags.host;
  if (sub.count("--port") > 0) config.port = flags.port;
  if (sub.count("--model-dir") > 0) config.model_dir = flags.model_dir;
  if (sub.count("--corpus-dir") > 0) config.corpus_dir = flags.corpus_dir;
  if (sub.count("--threads") > 0) config.threads = flags.threads;
  if (config.threads < 1) throw InvalidArgument("--threads must be at least 1");

  auto registry = std::make_shared<service::Registry>(service::Registry::load(config.model_dir));
  for (const auto& w : registry->warnings()) err << "warning: " << w << "\n";
  manifest.set_config(config.to_json());
  if (fs::is_directory(config.model_dir)) manifest.add_input(config.model_dir);
  manifest.save(manifest_path);
  out << registry->models().size() << " models, " << registry->profiles().size()
      << " profiles from " << config.model_dir.string() << "\n";
  if (dry_run) {
    out << config.to_json().dump(2) << "\n";
    return kExitOk;
  }

  service::Service handlers(registry, config);
  service::HttpServer server(handlers, config.threads);
  const int port = server.start(config.host, config.port);
  out << "listening on http://" << config.host << ":" << port << std::endl;
  g_stop_requested = false;
  std::signal(SIGINT, request_stop);
  std::signal(SIGTERM, request_stop);
  while (!g_stop_requested) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.stop();
  out << "stopped\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Conditional lead sheet generation: data preparation, training, sampling, "
               "evaluation and serving.",
               "leadsheet"};
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->always_capture_default();
  std::string workspace_text = ".";
  app.add_option("--workspace", workspace_text, "Directory that relative paths resolve against");

  std::string config_file;
  std::string manifest_file;
  auto common = [&](CLI::App* sub, std::uint64_t* seed) {
    sub->option_defaults()->always_capture_default();
    sub->add_option("--config", config_file, "JSON file of flag defaults");
    sub->add_option("--manifest", manifest_file, "Where to write the run manifest");
    sub->add_option("--seed", *seed, "Random seed");
  };

  PreprocessOptions pre;
  auto* pre_cmd = app.add_subcommand("preprocess", "MusicXML directory to normalized corpus, splits and profile");
  pre_cmd->add_option("--in", pre.in, "Directory of MusicXML files")->required();
  pre_cmd->add_option("--out", pre.out, "Corpus JSON to write")->required();
  common(pre_cmd, &pre.seed);

  TrainOptions tr;
  auto* train_cmd = app.add_subcommand("train", "Train a model on a corpus");
  train_cmd->add_option("--corpus", tr.corpus, "Training corpus")->required();
  train_cmd->add_option("--validation", tr.validation, "Corpus scored after training");
  train_cmd->add_option("--out", tr.out, "Checkpoint to write")->required();
  train_cmd->add_option("--preset", tr.preset, "desk or full")->check(CLI::IsMember({"desk", "full"}));
  train_cmd->add_option("--arch", tr.arch, "lstm or transformer")
      ->check(CLI::IsMember({"lstm", "transformer"}));
  train_cmd->add_option("--epochs", tr.epochs);
  train_cmd->add_option("--learning-rate,--lr", tr.learning_rate);
  train_cmd->add_option("--batch-size", tr.batch_size);
  train_cmd->add_option("--clip-norm", tr.clip_norm);
  train_cmd->add_option("--warmup-steps", tr.warmup_steps);
  train_cmd->add_option("--target-loss", tr.target_loss, "Stop once the eval-mode loss is below");
  train_cmd->add_option("--embedding", tr.embedding);
  train_cmd->add_option("--hidden", tr.hidden);
  train_cmd->add_option("--layers", tr.layers);
  train_cmd->add_option("--heads", tr.heads);
  train_cmd->add_option("--feed-forward", tr.feed_forward);
  train_cmd->add_option("--dropout", tr.dropout);
  train_cmd->add_option("--max-length", tr.max_length);
  common(train_cmd, &tr.seed);

  GenerateOptions gen;
  auto* gen_cmd = app.add_subcommand("generate", "Sample lead sheets for a condition track");
  gen_cmd->add_option("--model", gen.model, "Checkpoint")->required();
  gen_cmd->add_option("--out", gen.out, "Output prefix; writes PREFIX.json and PREFIX.musicxml")
      ->required();
  gen_cmd->add_option("--bars", gen.bars);
  gen_cmd->add_option("--valence", gen.valence, "Low, ModerateLow, Neutral, ModerateHigh or High");
  gen_cmd->add_option("--timesig", gen.time_signature);
  gen_cmd->add_option("--density", gen.density, "low, medium or high");
  gen_cmd->add_option("--grouping", gen.grouping, "auto or a grouping label for every bar");
  gen_cmd->add_option("--conditions", gen.conditions, "JSON list of per-bar conditions");
  gen_cmd->add_option("--count", gen.count);
  gen_cmd->add_option("--temperature", gen.temperature, "Fixed temperature");
  gen_cmd->add_option("--min-temperature", gen.min_temperature);
  gen_cmd->add_option("--max-temperature", gen.max_temperature);
  gen_cmd->add_flag("--greedy", gen.greedy);
  gen_cmd->add_option("--max-length", gen.max_length);
  common(gen_cmd, &gen.seed);

  EvaluateOptions ev;
  std::uint64_t unused_seed = 0;
  auto* eval_cmd = app.add_subcommand("evaluate", "Metric table for one or more corpora");
  eval_cmd->add_option("--corpus", ev.corpora, "Corpus JSON; repeat for more columns")->required();
  eval_cmd->add_option("--label", ev.labels, "Column label; repeat once per corpus");
  eval_cmd->add_option("--out", ev.out, "Report JSON to write");
  common(eval_cmd, &unused_seed);

  ValenceOptions va;
  auto* val_cmd = app.add_subcommand("valence", "Annotate a corpus with bar and piece valence");
  val_cmd->add_option("--in", va.in, "Corpus JSON")->required();
  val_cmd->add_option("--out", va.out, "Annotated corpus to write")->required();
  val_cmd->add_option("--table", va.table, "Chord valence table JSON");
  common(val_cmd, &unused_seed);

  SynthOptions sy;
  auto* synth_cmd = app.add_subcommand("synth", "Write a random synthetic corpus");
  synth_cmd->add_option("--out", sy.out, "Corpus JSON to write")->required();
  synth_cmd->add_option("--count", sy.count);
  synth_cmd->add_option("--min-bars", sy.min_bars);
  synth_cmd->add_option("--max-bars", sy.max_bars);
  synth_cmd->add_option("--musicxml-dir", sy.musicxml_dir, "Also write one MusicXML file per sheet");
  common(synth_cmd, &sy.seed);

  service::ServiceConfig serve_flags;
  std::string model_dir_text;
  std::string corpus_dir_text;
  bool dry_run = false;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  serve_cmd->add_option("--host", serve_flags.host);
  serve_cmd->add_option("--port", serve_flags.port)->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--model-dir", model_dir_text);
  serve_cmd->add_option("--corpus-dir", corpus_dir_text);
  serve_cmd->add_option("--threads", serve_flags.threads);
  serve_cmd->add_flag("--dry-run", dry_run, "Load models, print the configuration and exit");
  common(serve_cmd, &unused_seed);

  try {
    std::vector<std::string> args = raw_args;
    const fs::path workspace = flag_value(args, "--workspace").value_or(".");
    args = with_config_defaults(std::move(args), workspace);
    std::vector<const char*> argv = {"leadsheet"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kExitOk : kExitUsage;
    }

    CLI::App* sub = app.get_subcommands().front();
    RunManifest manifest(sub->get_name(), raw_args);
    manifest.set_config(config_snapshot(*sub));
    auto at = [&](const fs::path& p) { return resolve(workspace, p); };
    auto opt_at = [&](std::optional<fs::path>& p) {
      if (p) p = at(*p);
    };
    if (!config_file.empty() && sub != serve_cmd) manifest.add_input(at(config_file));

    fs::path default_manifest;
    if (sub == pre_cmd) {
      pre.in = at(pre.in);
      pre.out = at(pre.out);
      prepare_output(pre.out);
      manifest.add_seed("seed", pre.seed);
      default_manifest = run_preprocess(pre, manifest, out, err);
    } else if (sub == train_cmd) {
      tr.corpus = at(tr.corpus);
      tr.out = at(tr.out);
      prepare_output(tr.out);
      opt_at(tr.validation);
      manifest.add_seed("seed", tr.seed);
      default_manifest = run_train(tr, manifest, out, err);
    } else if (sub == gen_cmd) {
      gen.model = at(gen.model);
      gen.out = at(gen.out);
      prepare_output(gen.out);
      opt_at(gen.conditions);
      manifest.add_seed("seed", gen.seed);
      default_manifest = run_generate(gen, manifest, out, err);
    } else if (sub == eval_cmd) {
      for (auto& c : ev.corpora) c = at(c);
      opt_at(ev.out);
      if (ev.out) prepare_output(*ev.out);
      default_manifest = run_evaluate(ev, manifest, out, err);
    } else if (sub == val_cmd) {
      va.in = at(va.in);
      va.out = at(va.out);
      prepare_output(va.out);
      opt_at(va.table);
      default_manifest = run_valence(va, manifest, out, err);
    } else if (sub == synth_cmd) {
      sy.out = at(sy.out);
      prepare_output(sy.out);
      opt_at(sy.musicxml_dir);
      manifest.add_seed("seed", sy.seed);
      default_manifest = run_synth(sy, manifest, out, err);
    } else {
      if (!model_dir_text.empty()) serve_flags.model_dir = at(model_dir_text);
      if (!corpus_dir_text.empty()) serve_flags.corpus_dir = at(corpus_dir_text);
      std::optional<fs::path> service_config;
      if (!config_file.empty()) service_config = at(config_file);
      const fs::path path = manifest_file.empty() ? at("serve.manifest.json") : at(manifest_file);
      return serve(*serve_cmd, serve_flags, service_config, dry_run, manifest, path, out, err);
    }
    manifest.save(manifest_file.empty() ? at(default_manifest) : at(manifest_file));
    return kExitOk;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace leadsheet::cli
