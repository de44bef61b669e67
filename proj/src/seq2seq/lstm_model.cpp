#include "lstm_model.h"

#include "leadsheet/error.h"

namespace leadsheet::seq2seq {

namespace {

struct LstmDecoderState final : DecoderState {
  std::vector<nn::Matrix> h;
  std::vector<nn::Matrix> c;
};

}  // namespace

LstmModel::LstmModel(ModelConfig config, int encoder_vocab, int decoder_vocab)
    : Model(config, encoder_vocab, decoder_vocab) {
  const int e = config_.embedding;
  const int h = config_.hidden;
  const int half = h / 2;
  encoder_embedding_ = &weight("encoder.embedding", encoder_vocab_, e);
  for (int l = 0; l < config_.layers; ++l) {
    const int in = l == 0 ? e : h;
    const std::string p = "encoder.l" + std::to_string(l);
    forward_.push_back(lstm_weights(p + ".fwd", in, half));
    backward_.push_back(lstm_weights(p + ".bwd", in, half));
  }
  decoder_embedding_ = &weight("decoder.embedding", decoder_vocab_, e);
  for (int l = 0; l < config_.layers; ++l) {
    decoder_.push_back(lstm_weights("decoder.l" + std::to_string(l), l == 0 ? e : h, h));
  }
  output_weight_ = &weight("output.weight", h, decoder_vocab_);
  output_bias_ = &bias("output.bias", decoder_vocab_);
}

layers::LstmWeights LstmModel::lstm_weights(const std::string& prefix, int input, int hidden) {
  layers::LstmWeights w;
  w.input = &weight(prefix + ".input", input, 4 * hidden);
  w.recurrent = &weight(prefix + ".recurrent", hidden, 4 * hidden);
  w.bias = &bias(prefix + ".bias", 4 * hidden, Init::kLstmBias);
  return w;
}

std::vector<layers::LstmState> LstmModel::encode(nn::Graph& g, std::span<const int> encoder,
                                                 Rng* dropout) const {
  check_encoder(encoder);
  const int half = config_.hidden / 2;
  nn::Var x = nn::embedding(g.param(*encoder_embedding_), encoder);
  std::vector<layers::LstmState> init;
  for (int l = 0; l < config_.layers; ++l) {
    const nn::Var zeros = g.constant(nn::Matrix(1, half));
    const layers::LstmState zero{zeros, zeros};
    layers::LstmState f;
    layers::LstmState b;
    const auto li = static_cast<std::size_t>(l);
    nn::Var fwd = layers::lstm_layer(g, forward_[li], x, zero, false, &f);
    nn::Var bwd = layers::lstm_layer(g, backward_[li], x, zero, true, &b);
    const nn::Var hs[] = {f.h, b.h};
    const nn::Var cs[] = {f.c, b.c};
    init.push_back({nn::concat_cols(hs), nn::concat_cols(cs)});
    const nn::Var both[] = {fwd, bwd};
    x = nn::concat_cols(both);
    if (l + 1 < config_.layers) x = layers::maybe_dropout(x, config_.dropout, dropout);
  }
  return init;
}

nn::Var LstmModel::forward(nn::Graph& g, std::span<const int> encoder,
                           std::span<const int> decoder_input, Rng* dropout) const {
  check_decoder(decoder_input);
  const auto init = encode(g, encoder, dropout);
  nn::Var x = nn::embedding(g.param(*decoder_embedding_), decoder_input);
  for (int l = 0; l < config_.layers; ++l) {
    x = layers::lstm_layer(g, decoder_[static_cast<std::size_t>(l)], x,
                           init[static_cast<std::size_t>(l)], false, nullptr);
    if (l + 1 < config_.layers) x = layers::maybe_dropout(x, config_.dropout, dropout);
  }
  return layers::linear(g, x, *output_weight_, *output_bias_);
}

std::unique_ptr<DecoderState> LstmModel::start(std::span<const int> encoder) const {
  nn::NoGradGuard no_grad;
  nn::Graph g;
  auto state = std::make_unique<LstmDecoderState>();
  for (const auto& s : encode(g, encoder, nullptr)) {
    state->h.push_back(s.h.value());
    state->c.push_back(s.c.value());
  }
  return state;
}

std::vector<nn::Scalar> LstmModel::step(DecoderState& state, int token) const {
  auto* s = dynamic_cast<LstmDecoderState*>(&state);
  if (s == nullptr) throw InvalidArgument("decoder state belongs to another architecture");
  const int ids[] = {token};
  check_decoder(ids);
  nn::NoGradGuard no_grad;
  nn::Graph g;
  nn::Var x = nn::embedding(g.param(*decoder_embedding_), ids);
  for (std::size_t l = 0; l < decoder_.size(); ++l) {
    const auto& w = decoder_[l];
    const layers::LstmState next = layers::lstm_step(g, w, layers::linear(g, x, *w.input, *w.bias),
                                                     {g.view(s->h[l]), g.view(s->c[l])});
    x = next.h;
    s->h[l] = next.h.value();
    s->c[l] = next.c.value();
  }
  return layers::linear(g, x, *output_weight_, *output_bias_).value().data;
}

}  // namespace leadsheet::seq2seq
