#pragma once

#include <span>
#include <vector>

#include "charembed/charset.hpp"
#include "charembed/model.hpp"

namespace charembed {

// Fixed-size tweet vector: the encoder LSTM's hidden state after the last
// conv feature row.
class TweetEmbedding {
 public:
  TweetEmbedding() = default;
  explicit TweetEmbedding(std::vector<Real> values) : values_(std::move(values)) {}

  std::size_t dim() const { return values_.size(); }
  Real operator[](std::size_t i) const { return values_[i]; }
  std::span<const Real> values() const { return values_; }

  friend bool operator==(const TweetEmbedding&, const TweetEmbedding&) = default;

 private:
  std::vector<Real> values_;
};

// Conv stack: conv (stride 1) + ReLU per layer, max-pool (stride = pool
// size) where the layer has one. Input is the [150 x 70] character matrix.
Var char_cnn(Var input, const ParamBinding& params, const EncoderConfig& config);

// CharCNN followed by an LSTM over the feature rows from zero state; returns
// the final hidden state.
Var encode_tweet(Var input, const ParamBinding& params, const EncoderConfig& config);

// Frozen-parameter conveniences; no gradient tracking.
Tensor char_cnn(const CharMatrix& tweet, const ParamStore& params, const EncoderConfig& config);
TweetEmbedding encode_tweet(const CharMatrix& tweet, const ParamStore& params, const EncoderConfig& config);

}  // namespace charembed
