#include "leadsheet/seq2seq/model.h"

#include <algorithm>

#include "leadsheet/error.h"
#include "leadsheet/nn/optim.h"
#include "leadsheet/tokenizer/vocabulary.h"
#include "lstm_model.h"
#include "transformer_model.h"

namespace leadsheet::seq2seq {

Model::Model(ModelConfig config, int encoder_vocab, int decoder_vocab)
    : config_(config), encoder_vocab_(encoder_vocab), decoder_vocab_(decoder_vocab) {
  config_.validate();
  if (encoder_vocab <= tokenizer::kBarId || decoder_vocab <= tokenizer::kBarId) {
    throw InvalidArgument("vocabularies must hold at least the four special tokens");
  }
}

nn::Parameter& Model::weight(const std::string& name, int rows, int cols) {
  init_.push_back(Init::kGlorot);
  return params_.add(name, rows, cols);
}

nn::Parameter& Model::bias(const std::string& name, int cols, Init init) {
  init_.push_back(init);
  return params_.add(name, 1, cols);
}

void Model::initialize(std::uint64_t seed) {
  Rng rng(seed);
  const auto all = params_.all();
  for (std::size_t i = 0; i < all.size(); ++i) {
    nn::Matrix& m = all[i]->value;
    switch (init_[i]) {
      case Init::kGlorot: nn::glorot_uniform(m, rng); break;
      case Init::kZero: std::fill(m.data.begin(), m.data.end(), nn::Scalar(0)); break;
      case Init::kOne: std::fill(m.data.begin(), m.data.end(), nn::Scalar(1)); break;
      case Init::kLstmBias: {
        // Gates are [i f g o]; a forget bias of 1 keeps early memory open.
        const int h = m.cols / 4;
        for (int j = 0; j < m.cols; ++j) m.data[static_cast<std::size_t>(j)] = j / h == 1 ? 1 : 0;
        break;
      }
    }
  }
  params_.zero_grad();
}

namespace {

void check_ids(std::span<const int> ids, int vocab, int max_length, const char* side) {
  if (ids.empty()) throw InvalidArgument(std::string(side) + " sequence is empty");
  if (static_cast<int>(ids.size()) > max_length) {
    throw InvalidArgument(std::string(side) + " sequence of " + std::to_string(ids.size()) +
                          " tokens exceeds the model's maximum of " + std::to_string(max_length));
  }
  for (int id : ids) {
    if (id < 0 || id >= vocab) {
      throw DataError(std::string(side) + " token id " + std::to_string(id) +
                      " is outside the model's vocabulary of " + std::to_string(vocab));
    }
  }
}

}  // namespace

void Model::check_encoder(std::span<const int> ids) const {
  check_ids(ids, encoder_vocab_, config_.max_length, "encoder");
}

void Model::check_decoder(std::span<const int> ids) const {
  check_ids(ids, decoder_vocab_, config_.max_length, "decoder");
}

std::unique_ptr<Model> make_model(const ModelConfig& config, int encoder_vocab,
                                  int decoder_vocab) {
  if (config.architecture == Architecture::kLstm) {
    return std::make_unique<LstmModel>(config, encoder_vocab, decoder_vocab);
  }
  return std::make_unique<TransformerModel>(config, encoder_vocab, decoder_vocab);
}

nn::Var sequence_loss(const Model& model, nn::Graph& g, std::span<const int> encoder,
                      std::span<const int> decoder, Rng* dropout, int* tokens) {
  if (decoder.size() < 2) throw InvalidArgument("decoder sequence needs at least two tokens");
  const auto input = decoder.first(decoder.size() - 1);
  const auto targets = decoder.subspan(1);
  if (tokens != nullptr) {
    *tokens = static_cast<int>(
        std::count_if(targets.begin(), targets.end(), [](int t) { return t != tokenizer::kPadId; }));
  }
  return nn::cross_entropy_sum(model.forward(g, encoder, input, dropout), targets,
                               tokenizer::kPadId);
}

}  // namespace leadsheet::seq2seq
