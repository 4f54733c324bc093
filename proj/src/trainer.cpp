#include "charembed/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "charembed/charset.hpp"
#include "charembed/errors.hpp"

namespace charembed {
namespace {

std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename T>
T parse_number(const std::map<std::string, std::string>& kv, const std::string& key, T fallback) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  std::istringstream in(it->second);
  T value{};
  if (!(in >> value) || !(in >> std::ws).eof()) {
    throw ConfigError("invalid value '" + it->second + "' for '" + key + "'");
  }
  return value;
}

const std::string kParamPrefix = "param.";
const std::string kFirstMomentPrefix = "adam.m.";
const std::string kSecondMomentPrefix = "adam.v.";

}  // namespace

void TrainOptions::validate() const {
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (!(adam.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (!(adam.epsilon > 0.0)) throw ConfigError("Adam epsilon must be positive");
  if (clip_norm < 0.0) throw ConfigError("clip norm must be non-negative");
  augmentation.validate();
}

std::map<std::string, std::string> TrainOptions::to_key_values() const {
  return {{"train.epochs", std::to_string(epochs)},
          {"train.batch_size", std::to_string(batch_size)},
          {"train.learning_rate", exact(adam.learning_rate)},
          {"train.beta1", exact(adam.beta1)},
          {"train.beta2", exact(adam.beta2)},
          {"train.epsilon", exact(adam.epsilon)},
          {"train.dropout", exact(dropout)},
          {"train.clip_norm", exact(clip_norm)},
          {"train.count_param", exact(augmentation.count_param)},
          {"train.synonym_param", exact(augmentation.synonym_param)},
          {"train.seed", std::to_string(seed)},
          {"train.zero_output_projection", init.zero_output_projection ? "1" : "0"},
          {"train.checkpoint_every", std::to_string(checkpoint_every)}};
}

TrainOptions TrainOptions::from_key_values(const std::map<std::string, std::string>& kv) {
  return from_key_values(kv, TrainOptions{});
}

TrainOptions TrainOptions::from_key_values(const std::map<std::string, std::string>& kv, TrainOptions o) {
  o.epochs = parse_number(kv, "train.epochs", o.epochs);
  o.batch_size = parse_number(kv, "train.batch_size", o.batch_size);
  o.adam.learning_rate = parse_number(kv, "train.learning_rate", o.adam.learning_rate);
  o.adam.beta1 = parse_number(kv, "train.beta1", o.adam.beta1);
  o.adam.beta2 = parse_number(kv, "train.beta2", o.adam.beta2);
  o.adam.epsilon = parse_number(kv, "train.epsilon", o.adam.epsilon);
  o.dropout = parse_number(kv, "train.dropout", o.dropout);
  o.clip_norm = parse_number(kv, "train.clip_norm", o.clip_norm);
  o.augmentation.count_param = parse_number(kv, "train.count_param", o.augmentation.count_param);
  o.augmentation.synonym_param = parse_number(kv, "train.synonym_param", o.augmentation.synonym_param);
  o.seed = parse_number(kv, "train.seed", o.seed);
  o.augmentation.seed = o.seed;
  o.init.zero_output_projection = parse_number(kv, "train.zero_output_projection", int{o.init.zero_output_projection}) != 0;
  o.checkpoint_every = parse_number(kv, "train.checkpoint_every", o.checkpoint_every);
  return o;
}

std::vector<std::string> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read corpus '" + path + "'");
  std::vector<std::string> tweets;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    tweets.push_back(line);
  }
  if (tweets.empty()) throw IoError("corpus '" + path + "' contains no tweets");
  return tweets;
}

Trainer::Trainer(ModelConfig config, TrainOptions options, std::vector<std::string> corpus, SynonymLexicon lexicon)
    : config_(std::move(config)),
      options_(std::move(options)),
      corpus_(std::move(corpus)),
      lexicon_(std::move(lexicon)),
      rng_(options_.seed) {
  config_.validate();
  options_.validate();
  if (corpus_.empty()) throw ContractError("training corpus is empty");
  params_ = init_params(config_, rng_, options_.init);
  adam_ = AdamState::for_params(params_, options_.adam);
}

Trainer Trainer::resume(const Checkpoint& ck, std::vector<std::string> corpus, SynonymLexicon lexicon,
                        std::optional<TrainOptions> options_override) {
  const ModelConfig config = ModelConfig::from_key_values(ck.config);
  TrainOptions options = options_override ? *options_override : TrainOptions::from_key_values(ck.config);
  Trainer trainer(config, options, std::move(corpus), std::move(lexicon));

  auto require = [&ck](const std::string& name) -> const Tensor& {
    const Tensor* t = ck.find(name);
    if (!t) throw IoError("checkpoint lacks tensor '" + name + "'");
    return *t;
  };
  for (auto& [name, value] : trainer.params_.entries()) {
    const Tensor& stored = require(kParamPrefix + name);
    if (stored.shape() != value.shape()) throw IoError("checkpoint tensor '" + name + "' has the wrong shape");
    value = stored;
    trainer.adam_.first_moment.get(name) = require(kFirstMomentPrefix + name);
    trainer.adam_.second_moment.get(name) = require(kSecondMomentPrefix + name);
  }
  auto state = [&ck](const std::string& key) -> const std::string& {
    auto it = ck.config.find(key);
    if (it == ck.config.end()) throw IoError("checkpoint lacks training state '" + key + "'");
    return it->second;
  };
  trainer.epoch_ = std::stoull(state("state.epoch"));
  trainer.step_ = std::stoull(state("state.step"));
  trainer.adam_.step = std::stoull(state("state.adam_step"));
  trainer.rng_.restore(state("state.rng"));
  if (const Tensor* history = ck.find("train.loss_history")) {
    trainer.loss_history_.assign(history->values().begin(), history->values().end());
  }
  return trainer;
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint ck;
  ck.alphabet = Alphabet::standard().symbols();
  ck.config = config_.to_key_values();
  ck.config.merge(options_.to_key_values());
  ck.config["state.epoch"] = std::to_string(epoch_);
  ck.config["state.step"] = std::to_string(step_);
  ck.config["state.adam_step"] = std::to_string(adam_.step);
  ck.config["state.rng"] = rng_.serialize();
  for (const auto& [name, value] : params_.entries()) ck.tensors.emplace_back(kParamPrefix + name, value);
  for (const auto& [name, value] : adam_.first_moment.entries()) {
    ck.tensors.emplace_back(kFirstMomentPrefix + name, value);
  }
  for (const auto& [name, value] : adam_.second_moment.entries()) {
    ck.tensors.emplace_back(kSecondMomentPrefix + name, value);
  }
  if (!loss_history_.empty()) {
    ck.tensors.emplace_back("train.loss_history", Tensor({loss_history_.size()}, loss_history_));
  }
  return ck;
}

std::vector<AugmentedPair> Trainer::epoch_pairs() {
  std::vector<std::size_t> order(corpus_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  shuffle(order, rng_);
  std::vector<AugmentedPair> pairs;
  pairs.reserve(2 * order.size());
  for (std::size_t i : order) {
    pairs.push_back(AugmentedPair{corpus_[i], corpus_[i], {}});
    pairs.push_back(augment(corpus_[i], lexicon_, options_.augmentation, rng_));
  }
  return pairs;
}

double Trainer::train_step(std::span<const AugmentedPair> batch, std::ostream* log) {
  if (batch.empty()) throw ContractError("empty training batch");
  ParamStore grads = params_.zeros_like();
  const Real weight = 1.0 / static_cast<Real>(batch.size());
  double total = 0.0;
  const std::uint64_t this_step = step_ + 1;
  for (const AugmentedPair& pair : batch) {
    Tape tape;
    const ParamBinding bound(tape, params_, true);
    try {
      const DecodeResult r =
          autoencoder_loss(encode(pair.input), encode(pair.target), bound, config_, options_.dropout, true, rng_);
      total += r.loss.value()[0];
      tape.backward(r.loss);
    } catch (const NumericError& e) {
      throw NumericError(std::string(e.what()) + " at epoch " + std::to_string(epoch_ + 1) + " step " +
                         std::to_string(this_step));
    }
    for (auto& [name, g] : grads.entries()) {
      const Tensor& part = tape.grad(bound[name].id);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += weight * part[i];
    }
  }
  const double loss = total * weight;
  if (!std::isfinite(loss)) {
    throw NumericError("non-finite loss at epoch " + std::to_string(epoch_ + 1) + " step " +
                       std::to_string(this_step));
  }
  const double norm = clip_global_norm(grads, options_.clip_norm);
  if (!std::isfinite(norm)) {
    throw NumericError("non-finite gradient at epoch " + std::to_string(epoch_ + 1) + " step " +
                       std::to_string(this_step));
  }
  adam_step(params_, grads, adam_);
  step_ = this_step;
  loss_history_.push_back(loss);
  if (log) *log << "epoch " << epoch_ + 1 << " step " << step_ << " loss " << exact(loss) << '\n';
  return loss;
}

double Trainer::evaluate_loss(std::span<const AugmentedPair> batch) const {
  if (batch.empty()) throw ContractError("empty evaluation batch");
  double total = 0.0;
  Rng unused(0);
  for (const AugmentedPair& pair : batch) {
    Tape tape;
    const ParamBinding bound(tape, params_, false);
    total += autoencoder_loss(encode(pair.input), encode(pair.target), bound, config_, 0.0, false, unused)
                 .loss.value()[0];
  }
  return total / static_cast<double>(batch.size());
}

void Trainer::train_epoch(std::ostream* log) {
  const std::vector<AugmentedPair> pairs = epoch_pairs();
  const std::span<const AugmentedPair> all(pairs);
  for (std::size_t begin = 0; begin < pairs.size(); begin += options_.batch_size) {
    const std::size_t n = std::min(options_.batch_size, pairs.size() - begin);
    train_step(all.subspan(begin, n), log);
  }
  ++epoch_;
}

void Trainer::run(std::ostream* log) {
  while (epoch_ < options_.epochs) {
    train_epoch(log);
    if (log) log->flush();
    if (!options_.checkpoint_path.empty() && options_.checkpoint_every > 0 &&
        epoch_ % options_.checkpoint_every == 0) {
      save_checkpoint(options_.checkpoint_path, checkpoint());
    }
  }
  if (!options_.checkpoint_path.empty()) save_checkpoint(options_.checkpoint_path, checkpoint());
}

Checkpoint train(const std::string& corpus_path, const std::string& lexicon_path, const ModelConfig& config,
                 const TrainOptions& options, std::ostream* log) {
  std::vector<std::string> corpus = load_corpus(corpus_path);
  SynonymLexicon lexicon = lexicon_path.empty() ? SynonymLexicon() : SynonymLexicon::load(lexicon_path);
  Trainer trainer(config, options, std::move(corpus), std::move(lexicon));
  trainer.run(log);
  return trainer.checkpoint();
}

}  // namespace charembed
