#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "leadsheet/affect/valence.h"
#include "leadsheet/score/types.h"
#include "leadsheet/seq2seq/config.h"
#include "leadsheet/seq2seq/model.h"
#include "leadsheet/tokenizer/vocabulary.h"

namespace leadsheet::seq2seq {

struct TrainingPair {
  std::vector<int> encoder;  // condition tokens
  std::vector<int> decoder;  // lead-sheet tokens, <s> ... </s>
};

// Tokenizes each sheet with its own condition track.
std::vector<TrainingPair> make_pairs(std::span<const score::LeadSheet> corpus,
                                     const tokenizer::Vocabulary& encoder_vocab,
                                     const tokenizer::Vocabulary& decoder_vocab,
                                     const affect::ChordValenceTable& table =
                                         affect::ChordValenceTable::builtin());

struct EpochReport {
  int epoch = 0;             // 1-based
  double loss = 0.0;         // mean per-token loss with dropout, over the epoch
  double grad_norm = 0.0;    // largest pre-clip gradient norm of the epoch
  std::optional<double> eval_loss;  // dropout disabled; only with a target loss
};

struct TrainResult {
  std::vector<double> loss_history;  // EpochReport::loss per epoch
  std::optional<double> final_eval_loss;
  bool reached_target = false;
};

using EpochCallback = std::function<void(const EpochReport&)>;

// Teacher-forced training with Adam and global-norm clipping. Gradients of
// each batch are averaged per predicted token. Deterministic for a given
// seed. Throws TrainingDivergedError on a non-finite loss and DataError when a
// pair does not fit the model's vocabularies.
TrainResult train(Model& model, std::span<const TrainingPair> pairs, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

// Mean per-token cross-entropy with dropout disabled.
double evaluate_loss(const Model& model, std::span<const TrainingPair> pairs);

}  // namespace leadsheet::seq2seq
