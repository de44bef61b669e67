#include "leadsheet/seq2seq/checkpoint.h"

#include <fstream>

#include "leadsheet/error.h"
#include "leadsheet/hash.h"
#include "leadsheet/score/corpus_json.h"

namespace leadsheet::seq2seq {

namespace {

constexpr const char* kFormat = "leadsheet-model";
constexpr int kVersion = 1;

}  // namespace

std::string vocab_pair_hash(const tokenizer::Vocabulary& encoder,
                            const tokenizer::Vocabulary& decoder) {
  return hex64(fnv1a64(encoder.hash() + ":" + decoder.hash()));
}

nlohmann::json checkpoint_to_json(const Model& model, const tokenizer::Vocabulary& encoder,
                                  const tokenizer::Vocabulary& decoder,
                                  const nlohmann::json& metadata) {
  if (static_cast<int>(encoder.size()) != model.encoder_vocab_size() ||
      static_cast<int>(decoder.size()) != model.decoder_vocab_size()) {
    throw InvalidArgument("vocabulary sizes do not match the model");
  }
  nlohmann::json params = nlohmann::json::object();
  for (const auto& p : model.parameters().all()) {
    params[p->name] = {{"rows", p->value.rows}, {"cols", p->value.cols}, {"data", p->value.data}};
  }
  return {{"format", kFormat},
          {"version", kVersion},
          {"config", model.config().to_json()},
          {"encoder_vocab", encoder.to_json()},
          {"decoder_vocab", decoder.to_json()},
          {"vocab_hash", vocab_pair_hash(encoder, decoder)},
          {"metadata", metadata},
          {"params", params}};
}

Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object() || j.value("format", "") != kFormat) {
      throw DataError("not a leadsheet model checkpoint");
    }
    if (j.at("version").get<int>() != kVersion) {
      throw DataError("unsupported checkpoint version " + j.at("version").dump());
    }
    auto encoder = tokenizer::Vocabulary::from_json(j.at("encoder_vocab"));
    auto decoder = tokenizer::Vocabulary::from_json(j.at("decoder_vocab"));
    const auto stored = j.at("vocab_hash").get<std::string>();
    if (stored != vocab_pair_hash(encoder, decoder)) {
      throw DataError("checkpoint vocabulary hash " + stored +
                      " does not match its vocabularies (" + vocab_pair_hash(encoder, decoder) +
                      ")");
    }
    const auto config = ModelConfig::from_json(j.at("config"));
    auto model = make_model(config, static_cast<int>(encoder.size()),
                            static_cast<int>(decoder.size()));
    const auto& params = j.at("params");
    if (params.size() != model->parameters().all().size()) {
      throw DataError("checkpoint holds " + std::to_string(params.size()) +
                      " tensors, the model has " +
                      std::to_string(model->parameters().all().size()));
    }
    for (const auto& p : model->parameters().all()) {
      if (!params.contains(p->name)) throw DataError("checkpoint lacks tensor " + p->name);
      const auto& t = params.at(p->name);
      if (t.at("rows").get<int>() != p->value.rows || t.at("cols").get<int>() != p->value.cols) {
        throw DataError("tensor " + p->name + " has the wrong shape");
      }
      auto data = t.at("data").get<std::vector<nn::Scalar>>();
      if (data.size() != p->value.size()) throw DataError("tensor " + p->name + " is truncated");
      p->value.data = std::move(data);
    }
    nlohmann::json metadata = j.value("metadata", nlohmann::json::object());
    return {std::move(model), std::move(encoder), std::move(decoder), std::move(metadata)};
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const tokenizer::Vocabulary& encoder, const tokenizer::Vocabulary& decoder,
                     const nlohmann::json& metadata) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << checkpoint_to_json(model, encoder, decoder, metadata).dump();
  if (!out) throw DataError("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const auto text = score::read_text_file(path.string());
  try {
    return checkpoint_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const tokenizer::Vocabulary& expected_encoder,
                           const tokenizer::Vocabulary& expected_decoder) {
  auto c = load_checkpoint(path);
  const auto want = vocab_pair_hash(expected_encoder, expected_decoder);
  const auto got = vocab_pair_hash(c.encoder_vocab, c.decoder_vocab);
  if (want != got) {
    throw DataError("checkpoint " + path.string() + " was trained with vocabulary " + got +
                    ", expected " + want);
  }
  return c;
}

}  // namespace leadsheet::seq2seq
