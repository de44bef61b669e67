#include "transformer_model.h"

#include <algorithm>
#include <cmath>

#include "leadsheet/error.h"

namespace leadsheet::seq2seq {

namespace {

struct TransformerDecoderState final : DecoderState {
  std::vector<nn::Matrix> cross_keys;  // per layer, encoder length x d
  std::vector<nn::Matrix> cross_values;
  std::vector<nn::Matrix> self_keys;  // per layer, one row per fed token
  std::vector<nn::Matrix> self_values;
  int position = 0;
};

void append_row(nn::Matrix& m, const nn::Matrix& row) {
  if (m.empty()) m.cols = row.cols;
  m.data.insert(m.data.end(), row.data.begin(), row.data.end());
  ++m.rows;
}

}  // namespace

TransformerModel::TransformerModel(ModelConfig config, int encoder_vocab, int decoder_vocab)
    : Model(config, encoder_vocab, decoder_vocab),
      positions_(layers::positional_encoding(config_.max_length, config_.hidden)) {
  const int d = config_.hidden;
  encoder_embedding_ = &weight("encoder.embedding", encoder_vocab_, d);
  for (int l = 0; l < config_.layers; ++l) {
    const std::string p = "encoder.l" + std::to_string(l);
    EncoderLayer layer;
    layer.self = attention(p + ".self");
    layer.ff = feed_forward(p + ".ff");
    layer.norm1 = norm(p + ".norm1");
    layer.norm2 = norm(p + ".norm2");
    encoder_.push_back(layer);
  }
  decoder_embedding_ = &weight("decoder.embedding", decoder_vocab_, d);
  for (int l = 0; l < config_.layers; ++l) {
    const std::string p = "decoder.l" + std::to_string(l);
    DecoderLayer layer;
    layer.self = attention(p + ".self");
    layer.cross = attention(p + ".cross");
    layer.ff = feed_forward(p + ".ff");
    layer.norm1 = norm(p + ".norm1");
    layer.norm2 = norm(p + ".norm2");
    layer.norm3 = norm(p + ".norm3");
    decoder_.push_back(layer);
  }
  output_weight_ = &weight("output.weight", d, decoder_vocab_);
  output_bias_ = &bias("output.bias", decoder_vocab_);
}

layers::AttentionWeights TransformerModel::attention(const std::string& prefix) {
  const int d = config_.hidden;
  layers::AttentionWeights w;
  w.query = &weight(prefix + ".query", d, d);
  w.query_bias = &bias(prefix + ".query_bias", d);
  w.key = &weight(prefix + ".key", d, d);
  w.key_bias = &bias(prefix + ".key_bias", d);
  w.value = &weight(prefix + ".value", d, d);
  w.value_bias = &bias(prefix + ".value_bias", d);
  w.output = &weight(prefix + ".output", d, d);
  w.output_bias = &bias(prefix + ".output_bias", d);
  return w;
}

TransformerModel::FeedForward TransformerModel::feed_forward(const std::string& prefix) {
  FeedForward f;
  f.w1 = &weight(prefix + ".w1", config_.hidden, config_.feed_forward);
  f.b1 = &bias(prefix + ".b1", config_.feed_forward);
  f.w2 = &weight(prefix + ".w2", config_.feed_forward, config_.hidden);
  f.b2 = &bias(prefix + ".b2", config_.hidden);
  return f;
}

TransformerModel::Norm TransformerModel::norm(const std::string& prefix) {
  Norm n;
  n.gain = &bias(prefix + ".gain", config_.hidden, Init::kOne);
  n.bias = &bias(prefix + ".bias", config_.hidden);
  return n;
}

nn::Var TransformerModel::norm_of(nn::Graph& g, nn::Var x, const Norm& n) const {
  return nn::layer_norm(x, g.param(*n.gain), g.param(*n.bias));
}

nn::Var TransformerModel::ff_of(nn::Graph& g, nn::Var x, const FeedForward& f,
                                Rng* dropout) const {
  nn::Var hidden = nn::relu(layers::linear(g, x, *f.w1, *f.b1));
  return layers::maybe_dropout(layers::linear(g, hidden, *f.w2, *f.b2), config_.dropout, dropout);
}

nn::Var TransformerModel::embed(nn::Graph& g, nn::Parameter& table, std::span<const int> ids,
                                int offset, Rng* dropout) const {
  const int n = static_cast<int>(ids.size());
  if (offset + n > config_.max_length) {
    throw InvalidArgument("position " + std::to_string(offset + n - 1) +
                          " is past the model's maximum length of " +
                          std::to_string(config_.max_length));
  }
  nn::Matrix pe(n, config_.hidden);
  std::copy_n(positions_.row(offset), pe.size(), pe.data.begin());
  const auto scale = static_cast<nn::Scalar>(std::sqrt(static_cast<double>(config_.hidden)));
  nn::Var x = nn::add(nn::scale(nn::embedding(g.param(table), ids), scale),
                      g.constant(std::move(pe)));
  return layers::maybe_dropout(x, config_.dropout, dropout);
}

nn::Var TransformerModel::encode(nn::Graph& g, std::span<const int> encoder,
                                 Rng* dropout) const {
  check_encoder(encoder);
  nn::Var x = embed(g, *encoder_embedding_, encoder, 0, dropout);
  for (const auto& layer : encoder_) {
    nn::Var a = layers::multi_head_attention(g, layer.self, x, x, config_.heads, false);
    x = norm_of(g, nn::add(x, layers::maybe_dropout(a, config_.dropout, dropout)), layer.norm1);
    x = norm_of(g, nn::add(x, ff_of(g, x, layer.ff, dropout)), layer.norm2);
  }
  return x;
}

nn::Var TransformerModel::forward(nn::Graph& g, std::span<const int> encoder,
                                  std::span<const int> decoder_input, Rng* dropout) const {
  check_decoder(decoder_input);
  const nn::Var memory = encode(g, encoder, dropout);
  nn::Var x = embed(g, *decoder_embedding_, decoder_input, 0, dropout);
  for (const auto& layer : decoder_) {
    nn::Var a = layers::multi_head_attention(g, layer.self, x, x, config_.heads, true);
    x = norm_of(g, nn::add(x, layers::maybe_dropout(a, config_.dropout, dropout)), layer.norm1);
    a = layers::multi_head_attention(g, layer.cross, x, memory, config_.heads, false);
    x = norm_of(g, nn::add(x, layers::maybe_dropout(a, config_.dropout, dropout)), layer.norm2);
    x = norm_of(g, nn::add(x, ff_of(g, x, layer.ff, dropout)), layer.norm3);
  }
  return layers::linear(g, x, *output_weight_, *output_bias_);
}

std::unique_ptr<DecoderState> TransformerModel::start(std::span<const int> encoder) const {
  nn::NoGradGuard no_grad;
  nn::Graph g;
  const nn::Var memory = encode(g, encoder, nullptr);
  auto state = std::make_unique<TransformerDecoderState>();
  for (const auto& layer : decoder_) {
    const auto& w = layer.cross;
    state->cross_keys.push_back(layers::linear(g, memory, *w.key, *w.key_bias).value());
    state->cross_values.push_back(layers::linear(g, memory, *w.value, *w.value_bias).value());
    state->self_keys.emplace_back();
    state->self_values.emplace_back();
  }
  return state;
}

std::vector<nn::Scalar> TransformerModel::step(DecoderState& state, int token) const {
  auto* s = dynamic_cast<TransformerDecoderState*>(&state);
  if (s == nullptr) throw InvalidArgument("decoder state belongs to another architecture");
  const int ids[] = {token};
  check_decoder(ids);
  nn::NoGradGuard no_grad;
  nn::Graph g;
  nn::Var x = embed(g, *decoder_embedding_, ids, s->position, nullptr);
  for (std::size_t l = 0; l < decoder_.size(); ++l) {
    const auto& layer = decoder_[l];
    const auto& w = layer.self;
    append_row(s->self_keys[l], layers::linear(g, x, *w.key, *w.key_bias).value());
    append_row(s->self_values[l], layers::linear(g, x, *w.value, *w.value_bias).value());
    // Every cached key precedes this query, so no mask is needed.
    nn::Var a = layers::attend(layers::linear(g, x, *w.query, *w.query_bias),
                               g.view(s->self_keys[l]), g.view(s->self_values[l]),
                               config_.heads, false);
    x = norm_of(g, nn::add(x, layers::linear(g, a, *w.output, *w.output_bias)), layer.norm1);
    const auto& c = layer.cross;
    a = layers::attend(layers::linear(g, x, *c.query, *c.query_bias), g.view(s->cross_keys[l]),
                       g.view(s->cross_values[l]), config_.heads, false);
    x = norm_of(g, nn::add(x, layers::linear(g, a, *c.output, *c.output_bias)), layer.norm2);
    x = norm_of(g, nn::add(x, ff_of(g, x, layer.ff, nullptr)), layer.norm3);
  }
  ++s->position;
  return layers::linear(g, x, *output_weight_, *output_bias_).value().data;
}

}  // namespace leadsheet::seq2seq
