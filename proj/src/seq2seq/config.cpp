#include "leadsheet/seq2seq/config.h"

#include "leadsheet/error.h"

namespace leadsheet::seq2seq {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

// Reads an optional field, keeping the default when absent.
template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

template <typename F>
auto parse(const char* what, F f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid ") + what + ": " + e.what());
  }
}

}  // namespace

std::string_view architecture_name(Architecture a) {
  return a == Architecture::kLstm ? "lstm" : "transformer";
}

std::optional<Architecture> architecture_from_name(std::string_view name) {
  if (name == "lstm") return Architecture::kLstm;
  if (name == "transformer") return Architecture::kTransformer;
  return std::nullopt;
}

ModelConfig ModelConfig::desk(Architecture a) {
  ModelConfig c;
  c.architecture = a;
  return c;
}

ModelConfig ModelConfig::full(Architecture a) {
  ModelConfig c;
  c.architecture = a;
  if (a == Architecture::kLstm) {
    c.embedding = 256;
    c.hidden = 1024;
    c.layers = 3;
    c.dropout = 0.3;
  } else {
    c.hidden = 512;
    c.layers = 4;
    c.heads = 8;
    c.feed_forward = 1536;
    c.dropout = 0.2;
  }
  return c;
}

void ModelConfig::validate() const {
  require(embedding > 0 && hidden > 0 && layers > 0 && heads > 0 && feed_forward > 0 &&
              max_length > 0,
          "model dimensions must be positive");
  require(dropout >= 0 && dropout < 1, "dropout must be in [0, 1)");
  if (architecture == Architecture::kLstm) {
    require(hidden % 2 == 0, "LSTM hidden size must be even (two encoder directions)");
  } else {
    require(hidden % heads == 0, "transformer width must be divisible by the head count");
  }
}

nlohmann::json ModelConfig::to_json() const {
  return {{"architecture", architecture_name(architecture)},
          {"embedding", embedding},
          {"hidden", hidden},
          {"layers", layers},
          {"heads", heads},
          {"feed_forward", feed_forward},
          {"dropout", dropout},
          {"max_length", max_length}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  return parse("model config", [&] {
    ModelConfig c;
    if (j.contains("architecture")) {
      const auto name = j.at("architecture").get<std::string>();
      const auto a = architecture_from_name(name);
      if (!a) throw DataError("unknown architecture '" + name + "'");
      c = desk(*a);
    }
    read(j, "embedding", c.embedding);
    read(j, "hidden", c.hidden);
    read(j, "layers", c.layers);
    read(j, "heads", c.heads);
    read(j, "feed_forward", c.feed_forward);
    read(j, "dropout", c.dropout);
    read(j, "max_length", c.max_length);
    try {
      c.validate();
    } catch (const InvalidArgument& e) {
      throw DataError(std::string("invalid model config: ") + e.what());
    }
    return c;
  });
}

void TrainConfig::validate() const {
  require(learning_rate > 0, "learning rate must be positive");
  require(batch_size >= 1, "batch size must be at least 1");
  require(epochs >= 0, "epoch count must not be negative");
  require(clip_norm > 0, "gradient clip norm must be positive");
  require(warmup_steps >= 0, "warmup steps must not be negative");
  require(!target_loss || *target_loss > 0, "target loss must be positive");
}

nlohmann::json TrainConfig::to_json() const {
  nlohmann::json j = {{"learning_rate", learning_rate},
                      {"batch_size", batch_size},
                      {"epochs", epochs},
                      {"seed", seed},
                      {"clip_norm", clip_norm},
                      {"warmup_steps", warmup_steps}};
  if (target_loss) j["target_loss"] = *target_loss;
  return j;
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  return parse("train config", [&] {
    TrainConfig c;
    read(j, "learning_rate", c.learning_rate);
    read(j, "batch_size", c.batch_size);
    read(j, "epochs", c.epochs);
    read(j, "seed", c.seed);
    read(j, "clip_norm", c.clip_norm);
    read(j, "warmup_steps", c.warmup_steps);
    if (j.contains("target_loss") && !j.at("target_loss").is_null()) {
      c.target_loss = j.at("target_loss").get<double>();
    }
    try {
      c.validate();
    } catch (const InvalidArgument& e) {
      throw DataError(std::string("invalid train config: ") + e.what());
    }
    return c;
  });
}

void SamplerConfig::validate() const {
  if (temperature) require(*temperature > 0, "temperature must be positive");
  require(min_temperature > 0 && min_temperature <= max_temperature,
          "temperature range must be positive and ordered");
  require(max_length >= 2, "max length must allow <s> and </s>");
}

nlohmann::json SamplerConfig::to_json() const {
  nlohmann::json j = {{"min_temperature", min_temperature},
                      {"max_temperature", max_temperature},
                      {"greedy", greedy},
                      {"seed", seed},
                      {"max_length", max_length}};
  if (temperature) j["temperature"] = *temperature;
  return j;
}

SamplerConfig SamplerConfig::from_json(const nlohmann::json& j) {
  return parse("sampler config", [&] {
    SamplerConfig c;
    if (j.contains("temperature") && !j.at("temperature").is_null()) {
      c.temperature = j.at("temperature").get<double>();
    }
    read(j, "min_temperature", c.min_temperature);
    read(j, "max_temperature", c.max_temperature);
    read(j, "greedy", c.greedy);
    read(j, "seed", c.seed);
    read(j, "max_length", c.max_length);
    try {
      c.validate();
    } catch (const InvalidArgument& e) {
      throw DataError(std::string("invalid sampler config: ") + e.what());
    }
    return c;
  });
}

}  // namespace leadsheet::seq2seq
