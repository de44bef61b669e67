#pragma once

#include <vector>

#include "layers.h"
#include "leadsheet/seq2seq/model.h"

namespace leadsheet::seq2seq {

class TransformerModel final : public Model {
 public:
  TransformerModel(ModelConfig config, int encoder_vocab, int decoder_vocab);

  nn::Var forward(nn::Graph& g, std::span<const int> encoder, std::span<const int> decoder_input,
                  Rng* dropout) const override;
  std::unique_ptr<DecoderState> start(std::span<const int> encoder) const override;
  std::vector<nn::Scalar> step(DecoderState& state, int token) const override;

 private:
  struct Norm {
    nn::Parameter* gain = nullptr;
    nn::Parameter* bias = nullptr;
  };
  struct FeedForward {
    nn::Parameter* w1 = nullptr;
    nn::Parameter* b1 = nullptr;
    nn::Parameter* w2 = nullptr;
    nn::Parameter* b2 = nullptr;
  };
  struct EncoderLayer {
    layers::AttentionWeights self;
    FeedForward ff;
    Norm norm1, norm2;
  };
  struct DecoderLayer {
    layers::AttentionWeights self;
    layers::AttentionWeights cross;
    FeedForward ff;
    Norm norm1, norm2, norm3;
  };

  layers::AttentionWeights attention(const std::string& prefix);
  FeedForward feed_forward(const std::string& prefix);
  Norm norm(const std::string& prefix);

  nn::Var norm_of(nn::Graph& g, nn::Var x, const Norm& n) const;
  nn::Var ff_of(nn::Graph& g, nn::Var x, const FeedForward& f, Rng* dropout) const;
  // Scaled embeddings plus positions [offset, offset + ids.size()).
  nn::Var embed(nn::Graph& g, nn::Parameter& table, std::span<const int> ids, int offset,
                Rng* dropout) const;
  nn::Var encode(nn::Graph& g, std::span<const int> encoder, Rng* dropout) const;

  nn::Parameter* encoder_embedding_;
  nn::Parameter* decoder_embedding_;
  std::vector<EncoderLayer> encoder_;
  std::vector<DecoderLayer> decoder_;
  nn::Parameter* output_weight_;
  nn::Parameter* output_bias_;
  nn::Matrix positions_;
};

}  // namespace leadsheet::seq2seq
