#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "leadsheet/seq2seq/checkpoint.h"
#include "leadsheet/tokenizer/profile.h"
#include "leadsheet/tokenizer/tokenizer.h"

namespace leadsheet::service {

// Every response body carries this as "api_version".
inline constexpr int kApiVersion = 1;

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path model_dir = "models";
  std::filesystem::path corpus_dir;  // empty: corpus references are refused
  int threads = 4;

  nlohmann::json to_json() const;
};

// Reads a JSON config file (all keys optional). Throws DataError.
ServiceConfig load_service_config(const std::filesystem::path& path);

// LEADSHEET_HOST, LEADSHEET_PORT and LEADSHEET_MODEL_DIR override the file.
// Throws DataError for a port that is not a number in 0..65535.
using EnvLookup = std::function<const char*(const char*)>;
void apply_environment(ServiceConfig& config, const EnvLookup& lookup);

// Models and condition profiles, loaded once and read-only afterwards.
class Registry {
 public:
  // Checkpoints are "<id>.json", profiles "<name>.profile.json"; run
  // manifests ("*.manifest.json") are ignored. Files that fail to load are
  // skipped and reported in warnings().
  static Registry load(const std::filesystem::path& model_dir);

  void add_model(std::string id, seq2seq::Checkpoint checkpoint);
  void add_profile(tokenizer::ConditionProfile profile);

  const seq2seq::Checkpoint* model(const std::string& id) const;
  const tokenizer::ConditionProfile* profile(const std::string& name) const;
  const std::map<std::string, seq2seq::Checkpoint>& models() const { return models_; }
  const std::map<std::string, tokenizer::ConditionProfile>& profiles() const { return profiles_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  std::map<std::string, seq2seq::Checkpoint> models_;
  std::map<std::string, tokenizer::ConditionProfile> profiles_;
  std::vector<std::string> warnings_;
};

struct Response {
  int status = 200;
  nlohmann::json body;
};

// Request handlers, independent of the transport. All of them are const and
// safe to call concurrently; identical requests give identical responses.
class Service {
 public:
  Service(std::shared_ptr<const Registry> registry, ServiceConfig config = {});

  Response generate(const nlohmann::json& request) const;
  Response make_template(const nlohmann::json& request) const;
  Response valence(const nlohmann::json& request) const;
  Response metrics(const nlohmann::json& request) const;
  Response models() const;
  Response vocab(const std::optional<std::string>& model) const;
  Response openapi() const;

  // Dispatches a raw request. Unparseable bodies give 400; unknown routes 404.
  Response handle(const std::string& method, const std::string& path, const std::string& body,
                  const std::map<std::string, std::string>& query = {}) const;

 private:
  std::shared_ptr<const Registry> registry_;
  ServiceConfig config_;
};

Response error_response(int status, const std::string& message);

nlohmann::json condition_to_json(const tokenizer::BarCondition& c);

// Parses per-bar conditions. "grouping": "auto" (or a missing grouping) takes
// the label of an 8-bar phrase layout. Throws DataError naming the bar.
tokenizer::ConditionTrack conditions_from_json(const nlohmann::json& bars);

nlohmann::json openapi_document();

// HTTP transport over the handlers. Requests are served on a thread pool.
class HttpServer {
 public:
  explicit HttpServer(const Service& service, int threads = 4);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds to host:port (0 picks a free port) and serves on a background
  // thread. Returns the bound port. Throws Error if binding fails.
  int start(const std::string& host, int port);
  // Binds and serves on the calling thread until stop() is called.
  void run(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace leadsheet::service
