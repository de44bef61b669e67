#pragma once

#include <vector>

#include "layers.h"
#include "leadsheet/seq2seq/model.h"

namespace leadsheet::seq2seq {

class LstmModel final : public Model {
 public:
  LstmModel(ModelConfig config, int encoder_vocab, int decoder_vocab);

  nn::Var forward(nn::Graph& g, std::span<const int> encoder, std::span<const int> decoder_input,
                  Rng* dropout) const override;
  std::unique_ptr<DecoderState> start(std::span<const int> encoder) const override;
  std::vector<nn::Scalar> step(DecoderState& state, int token) const override;

 private:
  layers::LstmWeights lstm_weights(const std::string& prefix, int input, int hidden);
  // Initial decoder state per layer from the final encoder states.
  std::vector<layers::LstmState> encode(nn::Graph& g, std::span<const int> encoder,
                                        Rng* dropout) const;

  nn::Parameter* encoder_embedding_;
  nn::Parameter* decoder_embedding_;
  std::vector<layers::LstmWeights> forward_;   // encoder, one per layer
  std::vector<layers::LstmWeights> backward_;  // encoder, one per layer
  std::vector<layers::LstmWeights> decoder_;
  nn::Parameter* output_weight_;
  nn::Parameter* output_bias_;
};

}  // namespace leadsheet::seq2seq
