#pragma once

#include <cstdint>
#include <string>

#include "leadsheet/nn/gradcheck.h"
#include "leadsheet/seq2seq/config.h"

namespace leadsheet::seq2seq {

// Finite-difference checks of the hand-written backward passes, on random
// parameters with every dimension at most 8.
struct GradientCheckReport {
  nn::GradCheckResult lstm_cell;        // one fused LSTM step with its projections
  nn::GradCheckResult attention_layer;  // multi-head attention, causal and cross
  nn::GradCheckResult model;            // a tiny model of the configured architecture

  double max_relative_error() const;
};

nn::GradCheckResult check_lstm_cell(int input, int hidden, std::uint64_t seed);
nn::GradCheckResult check_attention_layer(int queries, int keys, int width, int heads,
                                          std::uint64_t seed);
// Teacher-forced loss of a model shrunk from `config` (dims clamped to 8,
// at most 2 layers, dropout disabled) on a random sequence pair. Entries
// whose gradients are both below 1e-6 are skipped.
nn::GradCheckResult check_model(const ModelConfig& config, std::uint64_t seed);

GradientCheckReport gradient_check(const ModelConfig& config, std::uint64_t seed = 7);

}  // namespace leadsheet::seq2seq
