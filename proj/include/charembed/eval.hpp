#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "charembed/encoder.hpp"
#include "charembed/logistic.hpp"
#include "charembed/metrics.hpp"

namespace charembed {

// [r*s || |r-s|], product half first. Throws ContractError on a size mismatch.
std::vector<double> pair_features(const TweetEmbedding& r, const TweetEmbedding& s);

struct ParaphraseExample {
  std::string text_a;
  std::string text_b;
  int label = 0;  // 1: paraphrase
};

enum class Sentiment { kNegative = 0, kNeutral = 1, kPositive = 2 };
std::string_view sentiment_name(Sentiment s);

struct SentimentExample {
  std::string text;
  Sentiment label = Sentiment::kNeutral;
};

// text-a<TAB>text-b<TAB>{0,1}
std::vector<ParaphraseExample> load_paraphrase_tsv(const std::string& path);
// text<TAB>{positive,negative,neutral}
std::vector<SentimentExample> load_sentiment_tsv(const std::string& path);

struct EvalOptions {
  std::size_t folds = 5;
  std::vector<double> l2_grid = {1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  std::uint64_t seed = 0;
  LogisticOptions logistic;
};

struct ParaphraseReport {
  PrfScores scores;
  double threshold = 0.5;
  double l2 = 0.0;
};

struct SentimentReport {
  PrfScores positive;
  PrfScores negative;
  double averaged_f1 = 0.0;
  double l2 = 0.0;
};

using Embedder = std::function<TweetEmbedding(std::string_view)>;

// Cross-validates l2 and the threshold on the training features, refits on
// the whole training set, and scores the test set.
ParaphraseReport eval_paraphrase(const FeatureMatrix& train_x, std::span<const int> train_y,
                                 const FeatureMatrix& test_x, std::span<const int> test_y,
                                 const EvalOptions& options, std::ostream* warnings = nullptr);
ParaphraseReport eval_paraphrase(const std::vector<ParaphraseExample>& train,
                                 const std::vector<ParaphraseExample>& test, const Embedder& embed,
                                 const EvalOptions& options, std::ostream* warnings = nullptr);

// Three-class logistic regression; l2 chosen by k-fold CV on the averaged
// positive/negative F1. Neutral takes part in training only. Throws
// ContractError when a class is missing from the training labels.
SentimentReport eval_sentiment(const FeatureMatrix& train_x, std::span<const int> train_y,
                               const FeatureMatrix& test_x, std::span<const int> test_y,
                               const EvalOptions& options);
SentimentReport eval_sentiment(const std::vector<SentimentExample>& train, const std::vector<SentimentExample>& test,
                               const Embedder& embed, const EvalOptions& options);

// "P=<v> R=<v> F1=<v>"
std::string format_report(const PrfScores& scores);
std::map<std::string, std::string> report_key_values(const ParaphraseReport& report);
std::map<std::string, std::string> report_key_values(const SentimentReport& report);
void write_key_values(const std::string& path, const std::map<std::string, std::string>& kv);

}  // namespace charembed
