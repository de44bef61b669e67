#include "layers.h"

#include <cmath>

namespace leadsheet::seq2seq::layers {

LstmState lstm_step(nn::Graph& g, const LstmWeights& w, nn::Var projected, LstmState prev) {
  nn::Var gates = nn::add(projected, nn::matmul(prev.h, g.param(*w.recurrent)));
  nn::Var c = nn::lstm_cell_c(gates, prev.c);
  return {nn::lstm_cell_h(gates, c), c};
}

nn::Var lstm_layer(nn::Graph& g, const LstmWeights& w, nn::Var x, LstmState init, bool reverse,
                   LstmState* final_state) {
  const nn::Var projected = linear(g, x, *w.input, *w.bias);
  const int steps = x.rows();
  std::vector<nn::Var> outputs(static_cast<std::size_t>(steps));
  LstmState s = init;
  for (int i = 0; i < steps; ++i) {
    const int t = reverse ? steps - 1 - i : i;
    s = lstm_step(g, w, nn::slice_rows(projected, t, 1), s);
    outputs[static_cast<std::size_t>(t)] = s.h;
  }
  if (final_state != nullptr) *final_state = s;
  return nn::concat_rows(outputs);
}

nn::Var attend(nn::Var q, nn::Var k, nn::Var v, int heads, bool causal) {
  const int d = q.cols();
  const int dk = d / heads;
  const auto scale = static_cast<nn::Scalar>(1.0 / std::sqrt(static_cast<double>(dk)));
  std::vector<nn::Var> out;
  out.reserve(static_cast<std::size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    nn::Var qh = nn::slice_cols(q, h * dk, dk);
    nn::Var kh = nn::slice_cols(k, h * dk, dk);
    nn::Var vh = nn::slice_cols(v, h * dk, dk);
    nn::Var weights = nn::softmax_rows(nn::scale(nn::matmul_nt(qh, kh), scale), causal);
    out.push_back(nn::matmul(weights, vh));
  }
  return heads == 1 ? out.front() : nn::concat_cols(out);
}

nn::Var multi_head_attention(nn::Graph& g, const AttentionWeights& w, nn::Var x, nn::Var memory,
                             int heads, bool causal) {
  nn::Var q = linear(g, x, *w.query, *w.query_bias);
  nn::Var k = linear(g, memory, *w.key, *w.key_bias);
  nn::Var v = linear(g, memory, *w.value, *w.value_bias);
  return linear(g, attend(q, k, v, heads, causal), *w.output, *w.output_bias);
}

nn::Var linear(nn::Graph& g, nn::Var x, nn::Parameter& w, nn::Parameter& b) {
  return nn::add_row(nn::matmul(x, g.param(w)), g.param(b));
}

nn::Var maybe_dropout(nn::Var x, double p, Rng* rng) {
  if (rng == nullptr || p == 0) return x;
  return nn::dropout(x, static_cast<nn::Scalar>(p), *rng);
}

nn::Matrix positional_encoding(int positions, int width) {
  nn::Matrix pe(positions, width);
  for (int pos = 0; pos < positions; ++pos) {
    for (int i = 0; i < width; i += 2) {
      const double angle = pos / std::pow(10000.0, static_cast<double>(i) / width);
      pe.at(pos, i) = static_cast<nn::Scalar>(std::sin(angle));
      if (i + 1 < width) pe.at(pos, i + 1) = static_cast<nn::Scalar>(std::cos(angle));
    }
  }
  return pe;
}

}  // namespace leadsheet::seq2seq::layers
