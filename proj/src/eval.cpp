#include "charembed/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "charembed/charset.hpp"
#include "charembed/errors.hpp"
#include "charembed/rng.hpp"

namespace charembed {
namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cols;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    cols.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return cols;
}

template <typename Fn>
void for_each_line(const std::string& path, Fn fn) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read dataset '" + path + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    fn(split_tabs(line), path + ":" + std::to_string(line_no));
  }
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double sentiment_score(const LogisticModel& model, const FeatureMatrix& x, std::span<const int> y,
                       PrfScores* pos = nullptr, PrfScores* neg = nullptr) {
  std::vector<int> predicted;
  predicted.reserve(x.size());
  for (const auto& row : x) predicted.push_back(model.predict(row));
  const PrfScores p = precision_recall_f1(predicted, y, static_cast<int>(Sentiment::kPositive));
  const PrfScores n = precision_recall_f1(predicted, y, static_cast<int>(Sentiment::kNegative));
  if (pos) *pos = p;
  if (neg) *neg = n;
  return averaged_f1(p.f1, n.f1);
}

void require_all_sentiments(std::span<const int> y) {
  const std::set<int> present(y.begin(), y.end());
  for (Sentiment s : {Sentiment::kNegative, Sentiment::kNeutral, Sentiment::kPositive}) {
    if (!present.count(static_cast<int>(s))) {
      throw ContractError("sentiment training set has no '" + std::string(sentiment_name(s)) + "' examples");
    }
  }
}

}  // namespace

std::vector<double> pair_features(const TweetEmbedding& r, const TweetEmbedding& s) {
  if (r.dim() != s.dim()) throw ContractError("pair_features: embeddings differ in size");
  std::vector<double> out(2 * r.dim());
  for (std::size_t i = 0; i < r.dim(); ++i) {
    out[i] = r[i] * s[i];
    out[r.dim() + i] = std::fabs(r[i] - s[i]);
  }
  return out;
}

std::string_view sentiment_name(Sentiment s) {
  switch (s) {
    case Sentiment::kNegative: return "negative";
    case Sentiment::kNeutral: return "neutral";
    case Sentiment::kPositive: return "positive";
  }
  return "neutral";
}

std::vector<ParaphraseExample> load_paraphrase_tsv(const std::string& path) {
  std::vector<ParaphraseExample> out;
  for_each_line(path, [&out](const std::vector<std::string>& cols, const std::string& where) {
    if (cols.size() != 3) throw IoError(where + ": expected text-a<TAB>text-b<TAB>label");
    if (cols[2] != "0" && cols[2] != "1") throw IoError(where + ": label must be 0 or 1");
    out.push_back({cols[0], cols[1], cols[2] == "1" ? 1 : 0});
  });
  return out;
}

std::vector<SentimentExample> load_sentiment_tsv(const std::string& path) {
  std::vector<SentimentExample> out;
  for_each_line(path, [&out](const std::vector<std::string>& cols, const std::string& where) {
    if (cols.size() != 2) throw IoError(where + ": expected text<TAB>label");
    const std::string label = to_lower_ascii(cols[1]);
    Sentiment s;
    if (label == "positive") {
      s = Sentiment::kPositive;
    } else if (label == "negative") {
      s = Sentiment::kNegative;
    } else if (label == "neutral") {
      s = Sentiment::kNeutral;
    } else {
      throw IoError(where + ": unknown sentiment label '" + cols[1] + "'");
    }
    out.push_back({cols[0], s});
  });
  return out;
}

ParaphraseReport eval_paraphrase(const FeatureMatrix& train_x, std::span<const int> train_y,
                                 const FeatureMatrix& test_x, std::span<const int> test_y,
                                 const EvalOptions& options, std::ostream* warnings) {
  const CrossValidation cv =
      cross_validate_binary(train_x, train_y, options.folds, options.l2_grid, options.seed, options.logistic, warnings);
  LogisticOptions fit = options.logistic;
  fit.l2 = cv.l2;
  LogisticModel model = train_logistic(train_x, train_y, fit);
  model.threshold = cv.threshold;
  std::vector<int> predicted;
  for (const auto& row : test_x) predicted.push_back(model.predict(row));
  return ParaphraseReport{precision_recall_f1(predicted, test_y, 1), cv.threshold, cv.l2};
}

ParaphraseReport eval_paraphrase(const std::vector<ParaphraseExample>& train,
                                 const std::vector<ParaphraseExample>& test, const Embedder& embed,
                                 const EvalOptions& options, std::ostream* warnings) {
  auto featurize = [&embed](const std::vector<ParaphraseExample>& set, FeatureMatrix& x, std::vector<int>& y) {
    for (const ParaphraseExample& ex : set) {
      x.push_back(pair_features(embed(ex.text_a), embed(ex.text_b)));
      y.push_back(ex.label);
    }
  };
  FeatureMatrix train_x, test_x;
  std::vector<int> train_y, test_y;
  featurize(train, train_x, train_y);
  featurize(test, test_x, test_y);
  return eval_paraphrase(train_x, train_y, test_x, test_y, options, warnings);
}

SentimentReport eval_sentiment(const FeatureMatrix& train_x, std::span<const int> train_y,
                               const FeatureMatrix& test_x, std::span<const int> test_y,
                               const EvalOptions& options) {
  require_all_sentiments(train_y);
  if (options.folds < 2) throw ContractError("cross-validation needs at least two folds");
  if (options.l2_grid.empty()) throw ContractError("empty l2 grid");

  // k-fold selection of l2 on the averaged F1.
  std::vector<std::size_t> order(train_x.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(options.seed);
  shuffle(order, rng);
  double best_l2 = options.l2_grid.front();
  double best_score = -1.0;
  for (double l2 : options.l2_grid) {
    LogisticOptions opts = options.logistic;
    opts.l2 = l2;
    double total = 0.0;
    std::size_t used = 0;
    for (std::size_t k = 0; k < options.folds; ++k) {
      FeatureMatrix fx, hx;
      std::vector<int> fy, hy;
      for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const std::size_t i = order[pos];
        if (pos % options.folds == k) {
          hx.push_back(train_x[i]);
          hy.push_back(train_y[i]);
        } else {
          fx.push_back(train_x[i]);
          fy.push_back(train_y[i]);
        }
      }
      if (hx.empty() || std::set<int>(fy.begin(), fy.end()).size() < 2) continue;
      total += sentiment_score(train_logistic(fx, fy, opts), hx, hy);
      ++used;
    }
    const double mean = used ? total / static_cast<double>(used) : 0.0;
    if (mean > best_score) {
      best_score = mean;
      best_l2 = l2;
    }
  }

  LogisticOptions fit = options.logistic;
  fit.l2 = best_l2;
  const LogisticModel model = train_logistic(train_x, train_y, fit);
  SentimentReport report;
  report.l2 = best_l2;
  report.averaged_f1 = sentiment_score(model, test_x, test_y, &report.positive, &report.negative);
  return report;
}

SentimentReport eval_sentiment(const std::vector<SentimentExample>& train, const std::vector<SentimentExample>& test,
                               const Embedder& embed, const EvalOptions& options) {
  auto featurize = [&embed](const std::vector<SentimentExample>& set, FeatureMatrix& x, std::vector<int>& y) {
    for (const SentimentExample& ex : set) {
      const TweetEmbedding e = embed(ex.text);
      x.emplace_back(e.values().begin(), e.values().end());
      y.push_back(static_cast<int>(ex.label));
    }
  };
  FeatureMatrix train_x, test_x;
  std::vector<int> train_y, test_y;
  featurize(train, train_x, train_y);
  featurize(test, test_x, test_y);
  return eval_sentiment(train_x, train_y, test_x, test_y, options);
}

std::string format_report(const PrfScores& s) {
  return "P=" + fixed(s.precision) + " R=" + fixed(s.recall) + " F1=" + fixed(s.f1);
}

std::map<std::string, std::string> report_key_values(const ParaphraseReport& r) {
  return {{"task", "paraphrase"},
          {"precision", exact(r.scores.precision)},
          {"recall", exact(r.scores.recall)},
          {"f1", exact(r.scores.f1)},
          {"threshold", exact(r.threshold)},
          {"l2", exact(r.l2)}};
}

std::map<std::string, std::string> report_key_values(const SentimentReport& r) {
  return {{"task", "sentiment"},
          {"positive.precision", exact(r.positive.precision)},
          {"positive.recall", exact(r.positive.recall)},
          {"positive.f1", exact(r.positive.f1)},
          {"negative.precision", exact(r.negative.precision)},
          {"negative.recall", exact(r.negative.recall)},
          {"negative.f1", exact(r.negative.f1)},
          {"averaged_f1", exact(r.averaged_f1)},
          {"l2", exact(r.l2)}};
}

void write_key_values(const std::string& path, const std::map<std::string, std::string>& kv) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write report '" + path + "'");
  for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
  if (!out) throw IoError("failed writing report '" + path + "'");
}

}  // namespace charembed
