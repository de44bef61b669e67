#include "leadsheet/seq2seq/generate.h"

#include <algorithm>
#include <cmath>

#include "leadsheet/error.h"

namespace leadsheet::seq2seq {

std::vector<double> softmax_with_temperature(std::span<const double> logits, double tau) {
  if (!(tau > 0) || !std::isfinite(tau)) {
    throw InvalidArgument("temperature must be positive and finite");
  }
  if (logits.empty()) throw InvalidArgument("softmax of no logits");
  for (double z : logits) {
    if (!std::isfinite(z)) throw InvalidArgument("logits must be finite");
  }
  const double hi = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp((logits[i] - hi) / tau);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

std::vector<double> masked_distribution(std::span<const nn::Scalar> logits,
                                        std::span<const unsigned char> mask, double tau) {
  if (mask.size() != logits.size()) throw InvalidArgument("mask and logits differ in size");
  std::vector<double> allowed;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (mask[i]) allowed.push_back(static_cast<double>(logits[i]));
  }
  if (allowed.empty()) throw InvalidArgument("grammar mask allows no token");
  const auto p = softmax_with_temperature(allowed, tau);
  std::vector<double> out(logits.size(), 0.0);
  std::size_t k = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (mask[i]) out[i] = p[k++];
  }
  return out;
}

namespace {

int argmax_allowed(std::span<const nn::Scalar> logits, std::span<const unsigned char> mask) {
  int best = -1;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (mask[i] && (best < 0 || logits[i] > logits[static_cast<std::size_t>(best)])) {
      best = static_cast<int>(i);
    }
  }
  if (best < 0) throw InvalidArgument("grammar mask allows no token");
  return best;
}

int sample(std::span<const double> p, Rng& rng) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  int last = -1;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0) continue;
    cumulative += p[i];
    last = static_cast<int>(i);
    if (u < cumulative) return last;
  }
  return last;  // u landed in the rounding gap above the total
}

}  // namespace

Generation generate(const Model& model, const tokenizer::ConditionTrack& track,
                    const tokenizer::Vocabulary& encoder_vocab,
                    const tokenizer::Vocabulary& decoder_vocab, const SamplerConfig& config,
                    const tokenizer::SheetInfo& info) {
  config.validate();
  if (static_cast<int>(encoder_vocab.size()) != model.encoder_vocab_size() ||
      static_cast<int>(decoder_vocab.size()) != model.decoder_vocab_size()) {
    throw DataError("vocabulary sizes do not match the model");
  }
  if (config.max_length > model.config().max_length) {
    throw InvalidArgument("sampler max length " + std::to_string(config.max_length) +
                          " exceeds the model's " + std::to_string(model.config().max_length));
  }
  const auto encoder = tokenizer::encode_conditions(track, encoder_vocab);
  std::vector<int> capacities;
  for (const auto& c : track) capacities.push_back(c.time_signature.bar_ticks());
  tokenizer::DecoderGrammar grammar(decoder_vocab, capacities);
  const auto budget = static_cast<std::size_t>(config.max_length - 1);  // after <s>
  if (grammar.min_total_tokens() <= budget) grammar.set_token_budget(budget);

  Rng rng(config.seed);
  Generation out;
  out.temperature = config.greedy ? 0.0
                    : config.temperature
                        ? *config.temperature
                        : rng.uniform(config.min_temperature, config.max_temperature);
  out.tokens.role = tokenizer::Role::kDecoder;
  out.tokens.ids = {tokenizer::kStartId};

  auto state = model.start(encoder.ids);
  std::vector<unsigned char> mask(decoder_vocab.size());
  int token = tokenizer::kStartId;
  while (!grammar.done()) {
    if (static_cast<int>(out.tokens.ids.size()) >= config.max_length) {
      throw IncompleteGenerationError(
          "generation reached " + std::to_string(config.max_length) + " tokens in bar " +
              std::to_string(grammar.bar_index()) + " of " + std::to_string(track.size()),
          out.tokens.ids);
    }
    const auto logits = model.step(*state, token);
    grammar.allowed(mask);
    token = config.greedy ? argmax_allowed(logits, mask)
                          : sample(masked_distribution(logits, mask, out.temperature), rng);
    grammar.advance(token);
    out.tokens.ids.push_back(token);
  }
  out.sheet = tokenizer::decode_tokens(out.tokens, track, decoder_vocab, info);
  return out;
}

}  // namespace leadsheet::seq2seq
