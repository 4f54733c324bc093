#pragma once

#include <string>

#include "charembed/charset.hpp"
#include "charembed/encoder.hpp"
#include "charembed/model.hpp"

namespace charembed {

struct DecodeResult {
  Var loss;        // mean cross-entropy over all 150 positions
  Tensor logits;   // [150 x 70], values only
  std::size_t correct = 0;  // positions where argmax(logits) hits the target
};

// Teacher-forced reconstruction. The embedding sets (h, c) of both decoder
// LSTM layers through four affine maps; step 0 reads the learned start vector
// and step t reads the target's one-hot row t-1. Each step's layer-2 hidden
// state goes through the output projection and a softmax.
DecodeResult decode_train(Var embedding, const CharMatrix& target, const ParamBinding& params,
                          const DecoderConfig& config);

// Greedy generation: feed back the argmax class (lowest index on ties) until
// PAD is predicted or 150 characters are produced.
std::string decode_generate(const TweetEmbedding& embedding, const ParamStore& params, const DecoderConfig& config);

// Mean cross-entropy of a logit sequence against a target, used by the
// decoder and exposed for checking the loss head in isolation.
Var sequence_cross_entropy(std::span<const Var> logits, const CharMatrix& target);

}  // namespace charembed
