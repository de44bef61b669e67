#include "leadsheet/cli/manifest.h"

#include <algorithm>
#include <ctime>

#include "leadsheet/error.h"
#include "leadsheet/hash.h"
#include "leadsheet/score/corpus_json.h"

namespace leadsheet::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string path_hash(const fs::path& path) {
  if (!fs::is_directory(path)) return hex64(fnv1a64(score::read_text_file(path.string())));
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(path)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::uint64_t h = fnv1a64("");
  for (const auto& f : files) {
    h = fnv1a64(f.filename().string(), h);
    h = fnv1a64(hex64(fnv1a64(score::read_text_file(f.string()))), h);
  }
  return hex64(h);
}

namespace {

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json file_record(const fs::path& path) {
  return {{"path", path.generic_string()}, {"hash", path_hash(path)}};
}

}  // namespace

RunManifest::RunManifest(std::string command, std::vector<std::string> arguments)
    : command_(std::move(command)),
      arguments_(std::move(arguments)),
      started_(utc_now()),
      start_(std::chrono::steady_clock::now()) {}

void RunManifest::add_input(const fs::path& path) { inputs_.push_back(file_record(path)); }

void RunManifest::add_output(const fs::path& path) { outputs_.push_back(file_record(path)); }

void RunManifest::add_corpus_hash(const std::string& name, const std::string& hash) {
  corpus_hashes_[name] = hash;
}

json RunManifest::to_json() const {
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start_;
  return {{"format", "leadsheet-run"},
          {"version", 1},
          {"command", command_},
          {"arguments", arguments_},
          {"config", config_},
          {"seeds", seeds_},
          {"inputs", inputs_},
          {"outputs", outputs_},
          {"corpus_hashes", corpus_hashes_},
          {"timings", {{"started", started_}, {"seconds", elapsed.count()}}}};
}

void RunManifest::save(const fs::path& path) const {
  score::write_text_file(path.string(), to_json().dump(2) + "\n");
}

fs::path manifest_path_for(const fs::path& output) {
  return output.parent_path() / (output.stem().string() + ".manifest.json");
}

}  // namespace leadsheet::cli
