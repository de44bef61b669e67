#include "leadsheet/seq2seq/gradient_check.h"

#include <algorithm>

#include "layers.h"
#include "leadsheet/seq2seq/model.h"

namespace leadsheet::seq2seq {

namespace {

nn::Parameter& random_param(nn::ParameterSet& set, const std::string& name, int rows, int cols,
                            Rng& rng) {
  nn::Parameter& p = set.add(name, rows, cols);
  for (auto& v : p.value.data) v = static_cast<nn::Scalar>(rng.uniform(-1, 1));
  return p;
}

// Contracts y with fixed random weights so every output entry reaches the loss.
nn::Var project(nn::Graph& g, nn::Var y, const nn::Matrix& weights) {
  return nn::sum(nn::mul(y, g.view(weights)));
}

nn::Matrix random_matrix(int rows, int cols, Rng& rng) {
  nn::Matrix m(rows, cols);
  for (auto& v : m.data) v = static_cast<nn::Scalar>(rng.uniform(-1, 1));
  return m;
}

}  // namespace

double GradientCheckReport::max_relative_error() const {
  return std::max({lstm_cell.max_relative_error, attention_layer.max_relative_error,
                   model.max_relative_error});
}

nn::GradCheckResult check_lstm_cell(int input, int hidden, std::uint64_t seed) {
  Rng rng(seed);
  nn::ParameterSet set;
  auto& x = random_param(set, "x", 1, input, rng);
  auto& h = random_param(set, "h", 1, hidden, rng);
  auto& c = random_param(set, "c", 1, hidden, rng);
  layers::LstmWeights w;
  w.input = &random_param(set, "input", input, 4 * hidden, rng);
  w.recurrent = &random_param(set, "recurrent", hidden, 4 * hidden, rng);
  w.bias = &random_param(set, "bias", 1, 4 * hidden, rng);
  const nn::Matrix wh = random_matrix(1, hidden, rng);
  const nn::Matrix wc = random_matrix(1, hidden, rng);
  return nn::check_gradients(set, [&](nn::Graph& g) {
    const layers::LstmState next = layers::lstm_step(
        g, w, layers::linear(g, g.param(x), *w.input, *w.bias), {g.param(h), g.param(c)});
    return nn::add(project(g, next.h, wh), project(g, next.c, wc));
  });
}

nn::GradCheckResult check_attention_layer(int queries, int keys, int width, int heads,
                                          std::uint64_t seed) {
  Rng rng(seed);
  nn::ParameterSet set;
  auto& x = random_param(set, "x", queries, width, rng);
  auto& memory = random_param(set, "memory", keys, width, rng);
  layers::AttentionWeights w;
  w.query = &random_param(set, "query", width, width, rng);
  w.key = &random_param(set, "key", width, width, rng);
  w.value = &random_param(set, "value", width, width, rng);
  w.output = &random_param(set, "output", width, width, rng);
  w.query_bias = &random_param(set, "query_bias", 1, width, rng);
  w.key_bias = &random_param(set, "key_bias", 1, width, rng);
  w.value_bias = &random_param(set, "value_bias", 1, width, rng);
  w.output_bias = &random_param(set, "output_bias", 1, width, rng);
  const nn::Matrix self_weights = random_matrix(queries, width, rng);
  const nn::Matrix cross_weights = random_matrix(queries, width, rng);
  return nn::check_gradients(set, [&](nn::Graph& g) {
    nn::Var px = g.param(x);
    nn::Var self = layers::multi_head_attention(g, w, px, px, heads, true);
    nn::Var cross = layers::multi_head_attention(g, w, px, g.param(memory), heads, false);
    return nn::add(project(g, self, self_weights), project(g, cross, cross_weights));
  });
}

nn::GradCheckResult check_model(const ModelConfig& config, std::uint64_t seed) {
  ModelConfig tiny = config;
  tiny.heads = std::min(tiny.heads, 2);
  tiny.hidden = std::min(tiny.hidden, 8);
  tiny.hidden -= tiny.hidden % (tiny.architecture == Architecture::kLstm ? 2 : tiny.heads);
  tiny.embedding = std::min(tiny.embedding, 8);
  tiny.feed_forward = std::min(tiny.feed_forward, 8);
  tiny.layers = std::min(tiny.layers, 2);
  tiny.dropout = 0;
  tiny.max_length = 16;
  const int encoder_vocab = 7;
  const int decoder_vocab = 8;
  auto model = make_model(tiny, encoder_vocab, decoder_vocab);
  model->initialize(seed);
  Rng rng(seed + 1);
  std::vector<int> encoder(5);
  std::vector<int> decoder(6);
  for (int& t : encoder) t = 1 + static_cast<int>(rng.below(encoder_vocab - 1));
  for (int& t : decoder) t = 1 + static_cast<int>(rng.below(decoder_vocab - 1));
  // The loss is a sum over several tokens, so rounding in the central
  // difference is around 1e-10; entries far below 1e-6 would only measure it.
  return nn::check_gradients(
      model->parameters(),
      [&](nn::Graph& g) { return sequence_loss(*model, g, encoder, decoder, nullptr); }, 1e-5,
      1e-6);
}

GradientCheckReport gradient_check(const ModelConfig& config, std::uint64_t seed) {
  GradientCheckReport r;
  r.lstm_cell = check_lstm_cell(5, 4, seed);
  r.attention_layer = check_attention_layer(4, 3, 8, 2, seed);
  r.model = check_model(config, seed);
  return r;
}

}  // namespace leadsheet::seq2seq
