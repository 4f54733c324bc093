#include "charembed/autoencoder.hpp"

#include "charembed/errors.hpp"

namespace charembed {

Autoencoder::Autoencoder(ModelConfig config, ParamStore params) : config_(std::move(config)), params_(std::move(params)) {
  config_.validate();
  Rng probe(0);
  const ParamStore expected = init_params(config_, probe);
  for (const auto& [name, t] : expected.entries()) {
    if (!params_.contains(name)) throw ConfigError("parameter '" + name + "' missing");
    if (params_.get(name).shape() != t.shape()) {
      throw ConfigError("parameter '" + name + "' has shape " + shape_string(params_.get(name).shape()) +
                        ", config requires " + shape_string(t.shape()));
    }
  }
}

Autoencoder Autoencoder::from_checkpoint(const Checkpoint& checkpoint) {
  const ModelConfig config = ModelConfig::from_key_values(checkpoint.config);
  ParamStore params;
  const std::string prefix = "param.";
  for (const auto& [name, t] : checkpoint.tensors) {
    if (name.rfind(prefix, 0) == 0) params.add(name.substr(prefix.size()), t);
  }
  return Autoencoder(config, std::move(params));
}

TweetEmbedding Autoencoder::embed(std::string_view text) const {
  return encode_tweet(encode(text), params_, config_.encoder);
}

std::string Autoencoder::reconstruct(std::string_view text) const {
  return decode_generate(embed(text), params_, config_.decoder);
}

ReconstructionScore Autoencoder::score(std::string_view text) const {
  Tape tape;
  const ParamBinding bound(tape, params_, false);
  Rng unused(0);
  const CharMatrix m = encode(text);
  const DecodeResult r = autoencoder_loss(m, m, bound, config_, 0.0, false, unused);
  ReconstructionScore s;
  s.loss = r.loss.value()[0];
  s.positions = std::min(m.length() + 1, kMaxChars);
  for (std::size_t t = 0; t < s.positions; ++t) {
    const auto row = r.logits.row(t);
    std::size_t best = 0;
    for (std::size_t i = 1; i < row.size(); ++i) {
      if (row[i] > row[best]) best = i;
    }
    if (best == m.index(t)) ++s.correct;
  }
  return s;
}

DecodeResult autoencoder_loss(const CharMatrix& input, const CharMatrix& target, const ParamBinding& params,
                              const ModelConfig& config, double dropout, bool training, Rng& rng) {
  Tape& tape = params.tape();
  const Var embedding = encode_tweet(tape.constant(input.dense()), params, config.encoder);
  const Var regularized = ops::dropout(embedding, dropout, training, rng);
  return decode_train(regularized, target, params, config.decoder);
}

}  // namespace charembed
