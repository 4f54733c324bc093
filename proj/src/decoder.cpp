#include "charembed/decoder.hpp"

#include <vector>

#include "charembed/errors.hpp"

namespace charembed {
namespace {

struct DecoderState {
  ops::LstmState lower;
  ops::LstmState upper;
};

DecoderState bridge(Var embedding, const ParamBinding& p) {
  auto affine = [&](const char* which) {
    const std::string prefix = std::string("dec.bridge.") + which;
    return ops::add(ops::matmul(p[prefix + ".weight"], embedding), p[prefix + ".bias"]);
  };
  return DecoderState{{affine("h1"), affine("c1")}, {affine("h2"), affine("c2")}};
}

Var step(Var input, DecoderState& state, const ParamBinding& p, const ops::LstmWeights& lower,
         const ops::LstmWeights& upper) {
  state.lower = ops::lstm_cell(input, state.lower, lower);
  state.upper = ops::lstm_cell(state.lower.h, state.upper, upper);
  return ops::add(ops::matmul(p["dec.out.weight"], state.upper.h), p["dec.out.bias"]);
}

std::size_t lowest_argmax(const Tensor& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

void check_embedding(Var embedding, const ParamBinding& p, const DecoderConfig& config) {
  config.validate();
  const Shape& bridge_shape = p["dec.bridge.h1.weight"].shape();
  if (embedding.value().rank() != 1 || bridge_shape[1] != embedding.value().dim(0) ||
      bridge_shape[0] != config.hidden) {
    throw ConfigError("decoder expects embedding of size " + std::to_string(bridge_shape[1]) +
                      " and hidden size " + std::to_string(bridge_shape[0]));
  }
}

}  // namespace

Var sequence_cross_entropy(std::span<const Var> logits, const CharMatrix& target) {
  if (logits.size() != kMaxChars) throw DimensionError("sequence loss expects 150 logit rows");
  Tape& tape = *logits.front().tape;
  std::vector<Var> losses;
  losses.reserve(kMaxChars);
  for (std::size_t t = 0; t < kMaxChars; ++t) {
    losses.push_back(ops::cross_entropy(tape.constant(target.row_one_hot(t)), ops::softmax(logits[t])));
  }
  return ops::mean(losses);
}

DecodeResult decode_train(Var embedding, const CharMatrix& target, const ParamBinding& p,
                          const DecoderConfig& config) {
  check_embedding(embedding, p, config);
  Tape& tape = p.tape();
  const ops::LstmWeights lower = p.lstm("dec.lstm1");
  const ops::LstmWeights upper = p.lstm("dec.lstm2");
  DecoderState state = bridge(embedding, p);

  DecodeResult result;
  result.logits = Tensor({kMaxChars, kAlphabetSize});
  std::vector<Var> logits;
  logits.reserve(kMaxChars);
  for (std::size_t t = 0; t < kMaxChars; ++t) {
    const Var input = t == 0 ? p["dec.start"] : tape.constant(target.row_one_hot(t - 1));
    const Var z = step(input, state, p, lower, upper);
    std::copy(z.value().values().begin(), z.value().values().end(), result.logits.row(t).begin());
    if (lowest_argmax(z.value()) == target.index(t)) ++result.correct;
    logits.push_back(z);
  }
  result.loss = sequence_cross_entropy(logits, target);
  return result;
}

std::string decode_generate(const TweetEmbedding& embedding, const ParamStore& params, const DecoderConfig& config) {
  Tape tape;
  const ParamBinding p(tape, params, false);
  const Var e = tape.constant(Tensor({embedding.dim()}, std::vector<Real>(embedding.values().begin(),
                                                                          embedding.values().end())));
  check_embedding(e, p, config);
  const ops::LstmWeights lower = p.lstm("dec.lstm1");
  const ops::LstmWeights upper = p.lstm("dec.lstm2");
  DecoderState state = bridge(e, p);

  std::vector<std::uint8_t> produced;
  Var input = p["dec.start"];
  for (std::size_t t = 0; t < kMaxChars; ++t) {
    const std::size_t next = lowest_argmax(step(input, state, p, lower, upper).value());
    if (next == Alphabet::kPad) break;
    produced.push_back(static_cast<std::uint8_t>(next));
    Tensor one_hot({kAlphabetSize});
    one_hot[next] = 1.0;
    input = tape.constant(std::move(one_hot));
  }
  return decode(CharMatrix::from_indices(produced));
}

}  // namespace charembed
