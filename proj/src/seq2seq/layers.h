#pragma once

// Building blocks shared by the two architectures and the gradient checks.

#include <span>
#include <string>
#include <vector>

#include "leadsheet/nn/graph.h"
#include "leadsheet/rng.h"

namespace leadsheet::seq2seq::layers {

struct LstmWeights {
  nn::Parameter* input = nullptr;      // in x 4H
  nn::Parameter* recurrent = nullptr;  // H x 4H
  nn::Parameter* bias = nullptr;       // 1 x 4H, gates [i f g o]
};

struct LstmState {
  nn::Var h;
  nn::Var c;
};

// One time step given the precomputed input projection x W + b (1 x 4H).
LstmState lstm_step(nn::Graph& g, const LstmWeights& w, nn::Var projected, LstmState prev);

// Runs a layer over all rows of x (T x in), forwards or backwards in time.
// Returns the outputs in input order (T x H) and the final state.
nn::Var lstm_layer(nn::Graph& g, const LstmWeights& w, nn::Var x, LstmState init, bool reverse,
                   LstmState* final_state);

struct AttentionWeights {
  nn::Parameter* query = nullptr;  // d x d
  nn::Parameter* key = nullptr;
  nn::Parameter* value = nullptr;
  nn::Parameter* output = nullptr;
  nn::Parameter* query_bias = nullptr;  // 1 x d
  nn::Parameter* key_bias = nullptr;
  nn::Parameter* value_bias = nullptr;
  nn::Parameter* output_bias = nullptr;
};

// Scaled dot-product attention over already projected keys and values.
// q: Tq x d, k and v: Tk x d. With causal set, query i sees keys 0..i.
nn::Var attend(nn::Var q, nn::Var k, nn::Var v, int heads, bool causal);

// Projects x to queries and `memory` to keys and values, attends, and
// applies the output projection.
nn::Var multi_head_attention(nn::Graph& g, const AttentionWeights& w, nn::Var x, nn::Var memory,
                             int heads, bool causal);

nn::Var linear(nn::Graph& g, nn::Var x, nn::Parameter& w, nn::Parameter& b);

nn::Var maybe_dropout(nn::Var x, double p, Rng* rng);

// Sinusoidal position table, rows = positions.
nn::Matrix positional_encoding(int positions, int width);

}  // namespace leadsheet::seq2seq::layers
