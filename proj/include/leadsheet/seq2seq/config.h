#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace leadsheet::seq2seq {

enum class Architecture { kLstm, kTransformer };

std::string_view architecture_name(Architecture a);  // "lstm", "transformer"
std::optional<Architecture> architecture_from_name(std::string_view name);

// Model shape shared by both architectures.
//
// LSTM: a bidirectional encoder of `layers` layers with hidden / 2 units per
// direction, and a decoder of `layers` layers with `hidden` units. The
// concatenated final encoder states of layer l initialise decoder layer l.
// Tokens are embedded with `embedding` units.
//
// Transformer: post-norm encoder and decoder stacks of `layers` layers with
// model width `hidden`, `heads` attention heads and `feed_forward` units in
// the position-wise layer. Token embeddings are `hidden` wide; `embedding` is
// not used.
struct ModelConfig {
  Architecture architecture = Architecture::kLstm;
  int embedding = 64;
  int hidden = 128;
  int layers = 2;
  int heads = 2;
  int feed_forward = 256;
  double dropout = 0.1;
  int max_length = 512;  // longest encoder or decoder sequence, in tokens

  static ModelConfig desk(Architecture a);
  static ModelConfig full(Architecture a);

  void validate() const;  // throws InvalidArgument
  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);  // throws DataError

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 32;
  int epochs = 100;
  std::uint64_t seed = 1;
  double clip_norm = 5.0;
  // Linear learning-rate ramp over the first optimizer steps; 0 disables it.
  int warmup_steps = 0;
  // Stop once the per-token loss with dropout disabled falls below this.
  std::optional<double> target_loss;

  void validate() const;  // throws InvalidArgument
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);  // throws DataError
};

struct SamplerConfig {
  // Fixed temperature; when unset one is drawn per piece from
  // [min_temperature, max_temperature].
  std::optional<double> temperature;
  double min_temperature = 0.8;
  double max_temperature = 1.2;
  bool greedy = false;  // argmax decoding, ignores temperature
  std::uint64_t seed = 0;
  int max_length = 512;  // decoder tokens including <s> and </s>

  void validate() const;  // throws InvalidArgument
  nlohmann::json to_json() const;
  static SamplerConfig from_json(const nlohmann::json& j);  // throws DataError
};

}  // namespace leadsheet::seq2seq
