#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "leadsheet/seq2seq/model.h"
#include "leadsheet/tokenizer/vocabulary.h"

namespace leadsheet::seq2seq {

// A model with the vocabularies it was trained on.
struct Checkpoint {
  std::unique_ptr<Model> model;
  tokenizer::Vocabulary encoder_vocab;
  tokenizer::Vocabulary decoder_vocab;
  nlohmann::json metadata;  // free-form, e.g. the training run
};

// Fingerprint of an (encoder, decoder) vocabulary pair.
std::string vocab_pair_hash(const tokenizer::Vocabulary& encoder,
                            const tokenizer::Vocabulary& decoder);

// {"format": "leadsheet-model", "version": 1, "config", "encoder_vocab",
//  "decoder_vocab", "vocab_hash", "metadata", "params": {name: {rows, cols, data}}}
nlohmann::json checkpoint_to_json(const Model& model, const tokenizer::Vocabulary& encoder,
                                  const tokenizer::Vocabulary& decoder,
                                  const nlohmann::json& metadata = nlohmann::json::object());

// Throws DataError for a malformed container, a vocabulary that does not
// match the stored hash, or tensors that do not fit the configured model.
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const tokenizer::Vocabulary& encoder, const tokenizer::Vocabulary& decoder,
                     const nlohmann::json& metadata = nlohmann::json::object());
Checkpoint load_checkpoint(const std::filesystem::path& path);

// As load_checkpoint, and rejects a checkpoint whose vocabularies differ from
// the expected pair.
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const tokenizer::Vocabulary& expected_encoder,
                           const tokenizer::Vocabulary& expected_decoder);

}  // namespace leadsheet::seq2seq
