// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Each check compares the library against an independent
// oracle from tests/support.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "charembed/augment.hpp"
#include "charembed/autoencoder.hpp"
#include "charembed/encoder.hpp"
#include "charembed/eval.hpp"
#include "charembed/metrics.hpp"
#include "charembed/trainer.hpp"
#include "support/op_catalogue.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace charembed;
namespace fs = std::filesystem;

namespace {

// Overfit harness optimizer settings; see README for how they were chosen.
constexpr std::size_t kOverfitBatch = 8;
constexpr double kOverfitLearningRate = 0.02;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c, d);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Outcome gradient_oracle() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(100);
  double worst = 0.0;
  std::string worst_op;
  std::size_t instances = 0;
  for (const testing::OpCase& op : testing::op_catalogue()) {
    for (int i = 0; i < 100; ++i) {
      const double rel = op.check(rng).max_relative_error;
      ++instances;
      if (!(rel <= worst)) {
        worst = rel;
        worst_op = op.name;
      }
    }
  }
  const double elapsed = seconds_since(start);
  return {worst < 1e-4 && elapsed < 120.0,
          std::to_string(instances) + " instances, worst relative error " + fmt("%.3g", worst) + " (" + worst_op +
              "), " + fmt("%.1f s", elapsed)};
}

Outcome shape_oracle() {
  const ModelConfig config;
  Rng rng(1);
  const ParamStore params = init_params(config, rng);
  const CharMatrix input = encode("shape check");
  const Tensor features = char_cnn(input, params, config.encoder);
  const TweetEmbedding e = encode_tweet(input, params, config.encoder);
  const bool pass = features.shape() == Shape{10, 512} && e.values().size() == 256 && input.dense().shape() == Shape{150, 70};
  return {pass, "input " + shape_string(input.dense().shape()) + ", features " + shape_string(features.shape()) +
                    ", embedding " + std::to_string(e.values().size())};
}

// Identity pairs only: no lexicon, so the augmented copy equals the input.
Outcome overfit_reconstruction() {
  const auto start = std::chrono::steady_clock::now();
  Rng data_rng(3);
  const std::vector<std::string> tweets = testing::synthetic_tweets(32, 60, data_rng);
  TrainOptions options;
  options.seed = 7;
  options.epochs = 500;
  options.batch_size = kOverfitBatch;
  options.adam.learning_rate = kOverfitLearningRate;
  options.dropout = 0.0;
  Trainer trainer(ModelConfig::scaled(8), options, tweets, SynonymLexicon());
  trainer.run();
  const Autoencoder model = trainer.model();
  std::size_t positions = 0, correct = 0, exact = 0;
  for (const std::string& t : tweets) {
    const ReconstructionScore s = model.score(t);
    positions += s.positions;
    correct += s.correct;
    exact += model.reconstruct(t) == decode(encode(t));
  }
  const double accuracy = double(correct) / double(positions);
  const double elapsed = seconds_since(start);
  return {accuracy >= 0.99 && exact >= 30 && elapsed < 900.0,
          fmt("teacher-forced accuracy %.4f, exact %g/32, final loss %.4g, %.0f s", accuracy, double(exact),
              trainer.loss_history().back(), elapsed)};
}

Outcome untrained_loss() {
  TrainOptions options;
  options.seed = 5;
  options.init.zero_output_projection = true;
  const std::vector<std::string> corpus = load_corpus(CHAREMBED_DATA_DIR "/sample_corpus.txt");
  Trainer trainer(ModelConfig::scaled(8), options, corpus,
                  SynonymLexicon::load(CHAREMBED_DATA_DIR "/lexicon_sample.tsv"));
  const std::vector<AugmentedPair> pairs = trainer.epoch_pairs();
  const std::size_t n = std::min(options.batch_size, pairs.size());
  const double loss = trainer.train_step(std::span(pairs).first(n));
  const double gap = std::abs(loss - std::log(70.0));
  return {gap < 1e-3, fmt("first-batch loss %.6f, |loss - ln 70| = %.3g", loss, gap)};
}

Outcome augmentation_statistics() {
  SynonymLexicon lex;
  lex.add("cold", Pos::kAdj, {"chilly", "icy", "frigid"});
  lex.add("walk", Pos::kVerb, {"stroll", "hike"});
  lex.add("dog", Pos::kNoun, {"pup", "hound", "mutt"});
  const std::string tweet = "@kim a cold, wet walk with the dog!! #winter";
  if (replaceable_tokens(tweet, lex).size() != 3) return {false, "fixture does not have 3 replaceable tokens"};

  const auto tokens = [](const std::string& text) {
    std::vector<std::string> out;
    for (const TokenSpan& s : whitespace_tokens(text)) out.push_back(text.substr(s.begin, s.end - s.begin));
    return out;
  };
  const std::vector<std::string> original = tokens(tweet);
  AugmentationConfig config;
  config.count_param = 0.5;
  Rng rng(55);
  std::array<std::size_t, 4> counts{};
  std::size_t replacements = 0, same_pos = 0, untouched = 0, untouched_identical = 0;
  const std::size_t draws = 100000;
  for (std::size_t i = 0; i < draws; ++i) {
    const AugmentedPair p = augment(tweet, lex, config, rng);
    ++counts[std::min<std::size_t>(p.replacements.size(), 3)];
    const std::vector<std::string> out = tokens(p.target);
    std::vector<bool> replaced(original.size(), false);
    for (const Replacement& r : p.replacements) {
      replaced[r.token] = true;
      ++replacements;
      const auto pos = lex.primary_pos(r.original);
      if (pos && lex.pos_tags(r.synonym).count(*pos)) ++same_pos;
    }
    for (std::size_t t = 0; t < original.size(); ++t) {
      if (replaced[t]) continue;
      ++untouched;
      untouched_identical += t < out.size() && out[t] == original[t];
    }
  }
  const std::array<double, 3> expected = {4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0};
  double worst = 0.0;
  for (std::size_t k = 1; k <= 3; ++k) worst = std::max(worst, std::abs(counts[k] / double(draws) - expected[k - 1]));
  const bool pass = counts[0] == 0 && worst <= 0.01 && same_pos == replacements && untouched_identical == untouched;
  return {pass, fmt("frequencies %.4f %.4f %.4f, max deviation %.4f", counts[1] / double(draws),
                    counts[2] / double(draws), counts[3] / double(draws), worst) +
                    ", same POS " + std::to_string(same_pos) + "/" + std::to_string(replacements) +
                    ", untouched identical " + std::to_string(untouched_identical) + "/" + std::to_string(untouched)};
}

Outcome logistic_oracle() {
  Rng rng(41);
  std::vector<std::array<double, 2>> pts;
  std::vector<int> labels;
  testing::overlapping_blobs(rng, pts, labels);
  FeatureMatrix fx;
  for (const auto& p : pts) fx.push_back({p[0], p[1]});
  LogisticOptions opts;
  opts.l2 = 1e-2;
  const double trained = logistic_objective(train_logistic(fx, labels, opts), fx, labels, opts.l2);
  const double grid = testing::grid_search_minimum(pts, labels, opts.l2);

  const std::size_t dim = 16;
  auto random_embedding = [&rng, dim] {
    std::vector<Real> v(dim);
    for (Real& x : v) x = rng.normal();
    return v;
  };
  auto paraphrase_set = [&](std::size_t n, FeatureMatrix& x, std::vector<int>& y) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::vector<Real> r = random_embedding();
      const int label = static_cast<int>(i % 2);
      std::vector<Real> s = label == 1 ? r : random_embedding();
      if (label == 1) {
        for (Real& v : s) v += 0.05 * rng.normal();
      }
      x.push_back(pair_features(TweetEmbedding(r), TweetEmbedding(s)));
      y.push_back(label);
    }
  };
  FeatureMatrix ptx, pex;
  std::vector<int> pty, pey;
  paraphrase_set(300, ptx, pty);
  paraphrase_set(300, pex, pey);
  const ParaphraseReport para = eval_paraphrase(ptx, pty, pex, pey, EvalOptions{});

  std::vector<std::vector<double>> centers(3, std::vector<double>(dim, 0.0));
  for (std::size_t c = 0; c < 3; ++c) centers[c][c] = 4.0;
  std::vector<int> sy, syt;
  const FeatureMatrix sx = testing::gaussian_clusters(centers, 100, 0.7, rng, sy);
  const FeatureMatrix sxt = testing::gaussian_clusters(centers, 100, 0.7, rng, syt);
  const SentimentReport senti = eval_sentiment(sx, sy, sxt, syt, EvalOptions{});

  const double gap = std::abs(trained - grid);
  return {gap < 1e-3 && para.scores.f1 >= 0.95 && senti.averaged_f1 >= 0.95,
          fmt("objective %.6f vs grid %.6f (gap %.2g), paraphrase F1 %.4f", trained, grid, gap, para.scores.f1) +
              fmt(", sentiment averaged F1 %.4f", senti.averaged_f1)};
}

std::string checkpoint_bytes(const Checkpoint& ck) {
  std::ostringstream out;
  write_checkpoint(out, ck);
  return out.str();
}

Outcome determinism() {
  const std::vector<std::string> corpus = load_corpus(CHAREMBED_DATA_DIR "/sample_corpus.txt");
  const SynonymLexicon lex = SynonymLexicon::load(CHAREMBED_DATA_DIR "/lexicon_sample.tsv");
  TrainOptions options;
  options.seed = 2718;
  options.epochs = 3;
  options.batch_size = 16;
  const ModelConfig config = ModelConfig::scaled(16);

  Trainer a(config, options, corpus, lex), b(config, options, corpus, lex);
  a.run();
  b.run();
  const std::string full = checkpoint_bytes(a.checkpoint());
  const bool repeat = full == checkpoint_bytes(b.checkpoint());

  TrainOptions first_leg = options;
  first_leg.epochs = 1;
  Trainer partial(config, first_leg, corpus, lex);
  partial.run();
  const fs::path dir = fs::temp_directory_path() / "charembed_acceptance";
  fs::create_directories(dir);
  const std::string path = (dir / "partial.ckpt").string();
  save_checkpoint(path, partial.checkpoint());
  Trainer resumed = Trainer::resume(load_checkpoint(path), corpus, lex, options);
  resumed.run();
  const bool resume_match = full == checkpoint_bytes(resumed.checkpoint());
  return {repeat && resume_match, std::string("repeat run ") + (repeat ? "identical" : "DIFFERS") +
                                      ", resumed run " + (resume_match ? "identical" : "DIFFERS") + " (" +
                                      std::to_string(full.size()) + " checkpoint bytes)"};
}

Outcome metric_oracle() {
  Rng rng(808);
  std::size_t mismatches = 0;
  for (int set = 0; set < 1000; ++set) {
    const std::size_t n = 1 + rng.below(60);
    const int classes = 2 + static_cast<int>(rng.below(2));
    std::vector<int> pred(n), gold(n);
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = static_cast<int>(rng.below(classes));
      gold[i] = static_cast<int>(rng.below(classes));
    }
    for (int positive = 0; positive < classes; ++positive) {
      const PrfScores got = precision_recall_f1(pred, gold, positive);
      const testing::NaiveCounts want = testing::naive_prf(pred, gold, positive);
      mismatches += got.precision != want.precision || got.recall != want.recall || got.f1 != want.f1;
    }
  }
  // TP=1, FP=1, FN=1.
  const PrfScores half = precision_recall_f1(std::vector<int>{1, 1, 0, 0}, std::vector<int>{1, 0, 1, 0}, 1);
  const bool half_ok = half.precision == 0.5 && half.recall == 0.5 && half.f1 == 0.5;
  return {mismatches == 0 && half_ok,
          std::to_string(mismatches) + " mismatches over 1000 sets, F1(P=R=0.5) = " + fmt("%g", half.f1)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient oracle", gradient_oracle},
      {"architecture shapes", shape_oracle},
      {"overfit reconstruction", overfit_reconstruction},
      {"untrained loss is ln 70", untrained_loss},
      {"augmentation statistics", augmentation_statistics},
      {"logistic regression and eval harness", logistic_oracle},
      {"training determinism", determinism},
      {"metric correctness", metric_oracle},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s criterion %zu: %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
