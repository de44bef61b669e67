#pragma once

#include <span>
#include <vector>

#include "leadsheet/nn/graph.h"
#include "leadsheet/score/types.h"
#include "leadsheet/seq2seq/config.h"
#include "leadsheet/seq2seq/model.h"
#include "leadsheet/tokenizer/tokenizer.h"

namespace leadsheet::seq2seq {

// softmax(logits / tau). Throws InvalidArgument for tau <= 0 or non-finite
// logits.
std::vector<double> softmax_with_temperature(std::span<const double> logits, double tau);

// softmax_with_temperature restricted to ids with mask[id] != 0; every other
// id gets probability exactly 0. Throws InvalidArgument when nothing is
// allowed.
std::vector<double> masked_distribution(std::span<const nn::Scalar> logits,
                                        std::span<const unsigned char> mask, double tau);

struct Generation {
  score::LeadSheet sheet;
  tokenizer::TokenSequence tokens;  // decoder ids, <s> ... </s>
  double temperature = 0.0;         // 0 for greedy decoding
};

// Samples one lead sheet for the condition track. Each step is masked by the
// decoder grammar, with a token budget of max_length so the sheet can always
// be closed in time. When even the shortest sheet for the track exceeds
// max_length the budget is dropped and IncompleteGenerationError is thrown
// with the partial stream once the limit is hit.
Generation generate(const Model& model, const tokenizer::ConditionTrack& track,
                    const tokenizer::Vocabulary& encoder_vocab,
                    const tokenizer::Vocabulary& decoder_vocab, const SamplerConfig& config,
                    const tokenizer::SheetInfo& info = {});

}  // namespace leadsheet::seq2seq
