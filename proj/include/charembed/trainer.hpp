#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "charembed/adam.hpp"
#include "charembed/augment.hpp"
#include "charembed/autoencoder.hpp"
#include "charembed/checkpoint.hpp"
#include "charembed/model.hpp"

namespace charembed {

struct TrainOptions {
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  AdamHyper adam;
  double dropout = 0.5;
  // Global gradient-norm cap; 0 disables clipping.
  double clip_norm = 5.0;
  AugmentationConfig augmentation;
  std::uint64_t seed = 0;
  InitOptions init;
  // Write `checkpoint_path` every this many epochs (0: only at the end).
  std::size_t checkpoint_every = 0;
  std::string checkpoint_path;

  void validate() const;
  std::map<std::string, std::string> to_key_values() const;
  // Starts from `base` and overrides the keys present in kv.
  static TrainOptions from_key_values(const std::map<std::string, std::string>& kv, TrainOptions base);
  static TrainOptions from_key_values(const std::map<std::string, std::string>& kv);
};

// One-tweet-per-line UTF-8 corpus; blank lines are skipped.
// Throws IoError naming the path when unreadable or empty.
std::vector<std::string> load_corpus(const std::string& path);

// Owns all mutable training state: parameters, Adam moments, the single
// generator that feeds initialization, shuffling, augmentation and dropout,
// and the loss history. Not thread-safe.
class Trainer {
 public:
  Trainer(ModelConfig config, TrainOptions options, std::vector<std::string> corpus, SynonymLexicon lexicon);

  // Restores every piece of state saved by checkpoint(). `options_override`
  // replaces the stored options (e.g. a larger epoch target), keeping the
  // stored generator and Adam state.
  static Trainer resume(const Checkpoint& checkpoint, std::vector<std::string> corpus, SynonymLexicon lexicon,
                        std::optional<TrainOptions> options_override = std::nullopt);

  // Runs whole epochs until options().epochs are complete, writing a
  // checkpoint every checkpoint_every epochs and once at the end (when a
  // checkpoint path is set). Log lines go to `log` when given.
  void run(std::ostream* log = nullptr);
  void train_epoch(std::ostream* log = nullptr);

  // Forward, backward and one Adam update over the batch; returns the mean
  // per-pair loss. Throws NumericError on a non-finite loss or gradient.
  double train_step(std::span<const AugmentedPair> batch, std::ostream* log = nullptr);

  // Mean loss of the batch with no update and no dropout.
  double evaluate_loss(std::span<const AugmentedPair> batch) const;

  // Identity and augmented pair for each tweet, in a freshly shuffled order.
  std::vector<AugmentedPair> epoch_pairs();

  Checkpoint checkpoint() const;

  const ModelConfig& config() const { return config_; }
  const TrainOptions& options() const { return options_; }
  const ParamStore& params() const { return params_; }
  const AdamState& adam() const { return adam_; }
  std::size_t epoch() const { return epoch_; }
  std::uint64_t step() const { return step_; }
  const std::vector<double>& loss_history() const { return loss_history_; }
  Autoencoder model() const { return Autoencoder(config_, params_); }

 private:
  ModelConfig config_;
  TrainOptions options_;
  std::vector<std::string> corpus_;
  SynonymLexicon lexicon_;
  Rng rng_;
  ParamStore params_;
  AdamState adam_;
  std::size_t epoch_ = 0;
  std::uint64_t step_ = 0;
  std::vector<double> loss_history_;
};

// Loads the corpus (and lexicon, when the path is non-empty), trains, and
// returns the final checkpoint. Also writes options.checkpoint_path if set.
Checkpoint train(const std::string& corpus_path, const std::string& lexicon_path, const ModelConfig& config,
                 const TrainOptions& options, std::ostream* log = nullptr);

}  // namespace charembed
