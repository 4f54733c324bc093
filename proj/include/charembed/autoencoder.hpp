#pragma once

#include <string>
#include <string_view>

#include "charembed/checkpoint.hpp"
#include "charembed/decoder.hpp"
#include "charembed/encoder.hpp"
#include "charembed/model.hpp"

namespace charembed {

// Teacher-forced reconstruction statistics for one text.
struct ReconstructionScore {
  double loss = 0.0;
  // Positions checked: the text's characters plus the terminating PAD.
  std::size_t positions = 0;
  std::size_t correct = 0;
};

// Frozen encoder-decoder: configuration plus parameters, for inference.
// Safe to share across threads; every call builds its own tape.
class Autoencoder {
 public:
  Autoencoder(ModelConfig config, ParamStore params);

  // Reads the model config block and "param." tensors of a checkpoint.
  static Autoencoder from_checkpoint(const Checkpoint& checkpoint);

  const ModelConfig& config() const { return config_; }
  const ParamStore& params() const { return params_; }

  TweetEmbedding embed(std::string_view text) const;
  std::string reconstruct(std::string_view text) const;
  ReconstructionScore score(std::string_view text) const;

 private:
  ModelConfig config_;
  ParamStore params_;
};

// The dropout-regularized training forward pass for one (input, target)
// pair on a trainable binding.
DecodeResult autoencoder_loss(const CharMatrix& input, const CharMatrix& target, const ParamBinding& params,
                              const ModelConfig& config, double dropout, bool training, Rng& rng);

}  // namespace charembed
