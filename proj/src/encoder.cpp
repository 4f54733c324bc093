#include "charembed/encoder.hpp"

namespace charembed {

Var char_cnn(Var input, const ParamBinding& params, const EncoderConfig& config) {
  config.validate();
  Var features = input;
  for (std::size_t h = 0; h < config.layers.size(); ++h) {
    const ConvLayerSpec& spec = config.layers[h];
    features = ops::relu(ops::conv1d(features, params[conv_weight_name(h + 1)], params[conv_bias_name(h + 1)], 1));
    if (spec.pool > 0) features = ops::maxpool1d(features, spec.pool, spec.pool);
  }
  return features;
}

Var encode_tweet(Var input, const ParamBinding& params, const EncoderConfig& config) {
  const Var features = char_cnn(input, params, config);
  Tape& tape = params.tape();
  ops::LstmState state{tape.constant(Tensor({config.hidden})), tape.constant(Tensor({config.hidden}))};
  const ops::LstmWeights weights = params.lstm("enc.lstm");
  const std::size_t steps = features.value().dim(0);
  for (std::size_t t = 0; t < steps; ++t) state = ops::lstm_cell(ops::row(features, t), state, weights);
  return state.h;
}

Tensor char_cnn(const CharMatrix& tweet, const ParamStore& params, const EncoderConfig& config) {
  Tape tape;
  const ParamBinding bound(tape, params, false);
  return char_cnn(tape.constant(tweet.dense()), bound, config).value();
}

TweetEmbedding encode_tweet(const CharMatrix& tweet, const ParamStore& params, const EncoderConfig& config) {
  Tape tape;
  const ParamBinding bound(tape, params, false);
  const Tensor& h = encode_tweet(tape.constant(tweet.dense()), bound, config).value();
  return TweetEmbedding(std::vector<Real>(h.values().begin(), h.values().end()));
}

}  // namespace charembed
