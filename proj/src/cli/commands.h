#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "leadsheet/cli/manifest.h"

namespace leadsheet::cli {

namespace fs = std::filesystem;

struct PreprocessOptions {
  fs::path in;
  fs::path out;
  std::uint64_t seed = 0;
};

struct TrainOptions {
  fs::path corpus;
  std::optional<fs::path> validation;
  fs::path out;
  std::string preset = "desk";
  std::string arch = "lstm";
  std::uint64_t seed = 1;
  std::optional<int> epochs;
  std::optional<double> learning_rate;
  std::optional<int> batch_size;
  std::optional<double> clip_norm;
  std::optional<int> warmup_steps;
  std::optional<double> target_loss;
  std::optional<int> embedding;
  std::optional<int> hidden;
  std::optional<int> layers;
  std::optional<int> heads;
  std::optional<int> feed_forward;
  std::optional<double> dropout;
  std::optional<int> max_length;
};

struct GenerateOptions {
  fs::path model;
  fs::path out;  // prefix
  int bars = 8;
  std::string valence = "Neutral";
  std::string time_signature = "4/4";
  std::string density = "medium";
  std::string grouping = "auto";
  std::optional<fs::path> conditions;
  int count = 1;
  std::uint64_t seed = 0;
  std::optional<double> temperature;
  double min_temperature = 0.8;
  double max_temperature = 1.2;
  bool greedy = false;
  std::optional<int> max_length;
};

struct EvaluateOptions {
  std::vector<fs::path> corpora;
  std::vector<std::string> labels;
  std::optional<fs::path> out;
};

struct ValenceOptions {
  fs::path in;
  fs::path out;
  std::optional<fs::path> table;
};

struct SynthOptions {
  fs::path out;
  int count = 50;
  std::uint64_t seed = 2024;
  int min_bars = 4;
  int max_bars = 16;
  std::optional<fs::path> musicxml_dir;
};

// Each command writes its outputs, records them in `manifest` and returns
// the path its manifest defaults to.
fs::path run_preprocess(const PreprocessOptions& o, RunManifest& manifest, std::ostream& out,
                        std::ostream& err);
fs::path run_train(const TrainOptions& o, RunManifest& manifest, std::ostream& out,
                   std::ostream& err);
fs::path run_generate(const GenerateOptions& o, RunManifest& manifest, std::ostream& out,
                      std::ostream& err);
fs::path run_evaluate(const EvaluateOptions& o, RunManifest& manifest, std::ostream& out,
                      std::ostream& err);
fs::path run_valence(const ValenceOptions& o, RunManifest& manifest, std::ostream& out,
                     std::ostream& err);
fs::path run_synth(const SynthOptions& o, RunManifest& manifest, std::ostream& out,
                   std::ostream& err);

// "<dir>/<stem><suffix>" for an output path.
fs::path sibling(const fs::path& path, const std::string& suffix);

}  // namespace leadsheet::cli
