#include "leadsheet/seq2seq/train.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "leadsheet/error.h"
#include "leadsheet/nn/optim.h"
#include "leadsheet/tokenizer/tokenizer.h"

namespace leadsheet::seq2seq {

std::vector<TrainingPair> make_pairs(std::span<const score::LeadSheet> corpus,
                                     const tokenizer::Vocabulary& encoder_vocab,
                                     const tokenizer::Vocabulary& decoder_vocab,
                                     const affect::ChordValenceTable& table) {
  std::vector<TrainingPair> pairs;
  pairs.reserve(corpus.size());
  for (const auto& sheet : corpus) {
    const auto track = tokenizer::conditions_of(sheet, table);
    pairs.push_back({tokenizer::encode_conditions(track, encoder_vocab).ids,
                     tokenizer::encode_leadsheet(sheet, decoder_vocab).ids});
  }
  return pairs;
}

double evaluate_loss(const Model& model, std::span<const TrainingPair> pairs) {
  nn::NoGradGuard no_grad;
  double total = 0.0;
  long tokens = 0;
  for (const auto& p : pairs) {
    nn::Graph g;
    int n = 0;
    total += static_cast<double>(sequence_loss(model, g, p.encoder, p.decoder, nullptr, &n)
                                     .value()
                                     .data[0]);
    tokens += n;
  }
  if (tokens == 0) throw InvalidArgument("no tokens to evaluate");
  return total / static_cast<double>(tokens);
}

TrainResult train(Model& model, std::span<const TrainingPair> pairs, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  if (pairs.empty()) throw InvalidArgument("training needs at least one pair");
  nn::ParameterSet& params = model.parameters();
  params.zero_grad();
  nn::Adam adam(params, {.learning_rate = config.learning_rate});
  Rng order_rng(config.seed);
  Rng dropout_rng = order_rng.fork(1);
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[order_rng.below(i)]);
    }
    EpochReport report;
    report.epoch = epoch;
    double epoch_loss = 0.0;
    long epoch_tokens = 0;
    const auto batch = static_cast<std::size_t>(config.batch_size);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      // Tokens first, so each sequence's gradient can be scaled to the batch mean.
      long batch_tokens = 0;
      for (std::size_t i = start; i < end; ++i) {
        const auto& d = pairs[order[i]].decoder;
        batch_tokens += std::count_if(d.begin() + 1, d.end(),
                                      [](int t) { return t != tokenizer::kPadId; });
      }
      for (std::size_t i = start; i < end; ++i) {
        const auto& p = pairs[order[i]];
        nn::Graph g;
        nn::Var loss = sequence_loss(model, g, p.encoder, p.decoder, &dropout_rng);
        const double value = static_cast<double>(loss.value().data[0]);
        if (!std::isfinite(value)) {
          std::ostringstream msg;
          msg << "training diverged: loss " << value << " at epoch " << epoch << ", pair "
              << order[i] << " (" << p.decoder.size() << " decoder tokens), after "
              << adam.steps() << " optimizer steps";
          throw TrainingDivergedError(msg.str());
        }
        epoch_loss += value;
        g.backward(loss, static_cast<nn::Scalar>(1.0 / static_cast<double>(batch_tokens)));
      }
      epoch_tokens += batch_tokens;
      const double norm = nn::clip_grad_norm(params, config.clip_norm);
      if (!std::isfinite(norm)) {
        throw TrainingDivergedError("training diverged: gradient norm " + std::to_string(norm) +
                                    " at epoch " + std::to_string(epoch));
      }
      report.grad_norm = std::max(report.grad_norm, norm);
      if (config.warmup_steps > 0) {
        const double ramp = std::min(
            1.0, static_cast<double>(adam.steps() + 1) / static_cast<double>(config.warmup_steps));
        adam.set_learning_rate(config.learning_rate * ramp);
      }
      adam.step();
    }
    report.loss = epoch_loss / static_cast<double>(epoch_tokens);
    result.loss_history.push_back(report.loss);
    if (config.target_loss) {
      report.eval_loss = evaluate_loss(model, pairs);
      result.final_eval_loss = report.eval_loss;
    }
    if (on_epoch) on_epoch(report);
    if (report.eval_loss && *report.eval_loss < *config.target_loss) {
      result.reached_target = true;
      break;
    }
  }
  return result;
}

}  // namespace leadsheet::seq2seq
