#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace leadsheet::cli {

// FNV-1a of a file's bytes as 16 hex digits. For a directory, of the sorted
// (name, content hash) pairs of its regular files. Throws DataError when the
// path cannot be read.
std::string path_hash(const std::filesystem::path& path);

// Record of one CLI run, written next to its main output:
//
//   {"format": "leadsheet-run", "version": 1, "command": "train",
//    "arguments": [...], "config": {...}, "seeds": {"seed": 1},
//    "inputs": [{"path": "...", "hash": "..."}], "outputs": [...],
//    "corpus_hashes": {"corpus.json": "..."},
//    "timings": {"started": "2024-01-01T00:00:00Z", "seconds": 1.5}}
//
// Two runs whose command, config, seeds and input hashes agree produce
// outputs with equal hashes.
class RunManifest {
 public:
  explicit RunManifest(std::string command, std::vector<std::string> arguments = {});

  void set_config(nlohmann::json config) { config_ = std::move(config); }
  void add_seed(const std::string& name, std::uint64_t seed) { seeds_[name] = seed; }
  // Hashes are taken when the path is added, so add outputs after writing.
  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);
  // Hash of the normalized corpus text, independent of file formatting.
  void add_corpus_hash(const std::string& name, const std::string& hash);

  const std::string& command() const { return command_; }
  nlohmann::json to_json() const;  // timings measured up to this call
  void save(const std::filesystem::path& path) const;

 private:
  std::string command_;
  std::vector<std::string> arguments_;
  nlohmann::json config_ = nlohmann::json::object();
  nlohmann::json seeds_ = nlohmann::json::object();
  nlohmann::json inputs_ = nlohmann::json::array();
  nlohmann::json outputs_ = nlohmann::json::array();
  nlohmann::json corpus_hashes_ = nlohmann::json::object();
  std::string started_;
  std::chrono::steady_clock::time_point start_;
};

// <dir>/<stem>.manifest.json for an output path; "model.json" gives
// "model.manifest.json".
std::filesystem::path manifest_path_for(const std::filesystem::path& output);

}  // namespace leadsheet::cli
