#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "leadsheet/nn/graph.h"
#include "leadsheet/rng.h"
#include "leadsheet/seq2seq/config.h"

namespace leadsheet::seq2seq {

// Opaque per-sequence state for incremental decoding.
class DecoderState {
 public:
  virtual ~DecoderState() = default;
};

// Encoder-decoder over token ids. The decoder is trained with teacher
// forcing: given decoder input ids d[0..n) it predicts d[1..n].
class Model {
 public:
  Model(ModelConfig config, int encoder_vocab, int decoder_vocab);
  virtual ~Model() = default;
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const ModelConfig& config() const { return config_; }
  int encoder_vocab_size() const { return encoder_vocab_; }
  int decoder_vocab_size() const { return decoder_vocab_; }
  nn::ParameterSet& parameters() { return params_; }
  const nn::ParameterSet& parameters() const { return params_; }

  // Glorot-uniform weights, zero biases, unit norm gains and a forget-gate
  // bias of 1, all drawn from `seed`.
  void initialize(std::uint64_t seed);

  // Logits (|decoder_input| x V). Row t scores the token after
  // decoder_input[t]. Dropout is active only when `dropout` is non-null.
  virtual nn::Var forward(nn::Graph& g, std::span<const int> encoder,
                          std::span<const int> decoder_input, Rng* dropout) const = 0;

  // Incremental decoding with dropout disabled. start() encodes the
  // conditions; each step() feeds one decoder token and returns the logits
  // for the next one.
  virtual std::unique_ptr<DecoderState> start(std::span<const int> encoder) const = 0;
  virtual std::vector<nn::Scalar> step(DecoderState& state, int token) const = 0;

 protected:
  enum class Init { kGlorot, kZero, kOne, kLstmBias };

  nn::Parameter& weight(const std::string& name, int rows, int cols);
  nn::Parameter& bias(const std::string& name, int cols, Init init = Init::kZero);

  void check_encoder(std::span<const int> ids) const;
  void check_decoder(std::span<const int> ids) const;

  ModelConfig config_;
  int encoder_vocab_;
  int decoder_vocab_;
  nn::ParameterSet params_;
  std::vector<Init> init_;  // one per parameter, registration order
};

std::unique_ptr<Model> make_model(const ModelConfig& config, int encoder_vocab,
                                  int decoder_vocab);

// Summed cross-entropy of one pair under teacher forcing. Returns 1 x 1;
// `tokens` receives the number of predicted positions.
nn::Var sequence_loss(const Model& model, nn::Graph& g, std::span<const int> encoder,
                      std::span<const int> decoder, Rng* dropout, int* tokens = nullptr);

}  // namespace leadsheet::seq2seq
