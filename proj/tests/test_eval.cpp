#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "charembed/errors.hpp"
#include "charembed/eval.hpp"
#include "charembed/metrics.hpp"
#include "support/oracles.hpp"

using namespace charembed;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "charembed_unit";
  fs::create_directories(dir);
  return dir / name;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

}  // namespace

TEST_CASE("precision, recall and F1 hand counts") {
  const std::vector<int> all = {1, 0, 1, 1};
  const PrfScores perfect = precision_recall_f1(all, all, 1);
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.recall == 1.0);
  CHECK(perfect.f1 == 1.0);

  // TP=2, FP=1, FN=2.
  const std::vector<int> pred = {1, 1, 1, 0, 0, 0}, gold = {1, 1, 0, 1, 1, 0};
  const PrfScores s = precision_recall_f1(pred, gold, 1);
  CHECK(s.precision == doctest::Approx(2.0 / 3.0));
  CHECK(s.recall == doctest::Approx(0.5));
  CHECK(s.f1 == doctest::Approx(4.0 / 7.0));

  // P = R = 0.5.
  const PrfScores half = precision_recall_f1(std::vector<int>{1, 1, 0, 0}, std::vector<int>{1, 0, 1, 0}, 1);
  CHECK(half.f1 == 0.5);

  const PrfScores none = precision_recall_f1(std::vector<int>{0, 0}, std::vector<int>{0, 0}, 1);
  CHECK(none.precision == 0.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f1 == 0.0);
  CHECK(averaged_f1(0.8, 0.6) == doctest::Approx(0.7));
  CHECK_THROWS_AS(precision_recall_f1(std::vector<int>{1}, std::vector<int>{1, 0}, 1), DimensionError);
}

TEST_CASE("metrics agree exactly with naive counting on random sets") {
  Rng rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.below(100);
    std::vector<int> p(n), a(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = static_cast<int>(rng.below(3));
      a[i] = static_cast<int>(rng.below(3));
    }
    for (int cls = 0; cls < 3; ++cls) {
      const PrfScores got = precision_recall_f1(p, a, cls);
      const testing::NaiveCounts want = testing::naive_prf(p, a, cls);
      CHECK(got.precision == want.precision);
      CHECK(got.recall == want.recall);
      CHECK(got.f1 == want.f1);
    }
  }
}

TEST_CASE("pair features") {
  const TweetEmbedding r(std::vector<Real>{1, 2}), s(std::vector<Real>{3, -1});
  CHECK(pair_features(r, s) == std::vector<double>{3, -2, 2, 3});
  CHECK(pair_features(r, s) == pair_features(s, r));
  CHECK(pair_features(r, r) == std::vector<double>{1, 4, 0, 0});
  CHECK_THROWS_AS(pair_features(r, TweetEmbedding(std::vector<Real>{1})), ContractError);
}

TEST_CASE("logistic regression: separable points, regularization limit and monotone descent") {
  const FeatureMatrix x = {{-1.0}, {1.0}};
  const std::vector<int> y = {0, 1};
  const LogisticModel m = train_logistic(x, y);
  CHECK(m.predict(x[0]) == 0);
  CHECK(m.predict(x[1]) == 1);

  LogisticOptions heavy;
  heavy.l2 = 1e6;
  const LogisticModel flat = train_logistic(x, y, heavy);
  CHECK(std::abs(flat.weights[0]) < 1e-5);
  CHECK(flat.positive_probability(x[0]) == doctest::Approx(0.5).epsilon(1e-5));

  Rng rng(3);
  std::vector<std::array<double, 2>> pts;
  std::vector<int> labels;
  testing::overlapping_blobs(rng, pts, labels);
  FeatureMatrix fx;
  for (const auto& p : pts) fx.push_back({p[0], p[1]});
  std::vector<double> trace;
  train_logistic(fx, labels, {}, &trace);
  REQUIRE(trace.size() > 2);
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1]);

  CHECK_THROWS_AS(train_logistic(x, std::vector<int>{1, 1}), ContractError);
  CHECK_THROWS_AS(train_logistic(x, std::vector<int>{1}), DimensionError);
}

TEST_CASE("logistic optimum matches a brute-force weight grid") {
  Rng rng(41);
  std::vector<std::array<double, 2>> pts;
  std::vector<int> labels;
  testing::overlapping_blobs(rng, pts, labels);
  FeatureMatrix fx;
  for (const auto& p : pts) fx.push_back({p[0], p[1]});
  LogisticOptions opts;
  opts.l2 = 1e-2;
  const LogisticModel m = train_logistic(fx, labels, opts);
  const double trained = logistic_objective(m, fx, labels, opts.l2);
  const double grid = testing::grid_search_minimum(pts, labels, opts.l2);
  CHECK(std::abs(trained - grid) < 1e-3);
  CHECK(trained <= grid + 1e-9);
}

TEST_CASE("multiclass probabilities sum to one") {
  Rng rng(6);
  std::vector<int> y;
  const FeatureMatrix x = testing::gaussian_clusters({{0, 3}, {3, 0}, {-3, -3}}, 20, 0.5, rng, y);
  const LogisticModel m = train_logistic(x, y);
  CHECK(m.classes == 3);
  std::size_t right = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto p = m.probabilities(x[i]);
    CHECK(p[0] + p[1] + p[2] == doctest::Approx(1.0));
    right += m.predict(x[i]) == y[i];
  }
  CHECK(right == x.size());
  CHECK_THROWS_AS(m.positive_probability(x[0]), ContractError);
}

TEST_CASE("threshold selection on hand-computable sets") {
  // Grid F1s: 2/3 (0.05-0.10), 3/4 (0.15-0.20), 6/7 (0.25-0.30), 2/3, 4/5, 1/2, 0.
  const std::vector<double> probs = {0.92, 0.81, 0.33, 0.22, 0.12, 0.64};
  const std::vector<int> labels = {1, 1, 1, 0, 0, 0};
  const ThresholdChoice c = select_threshold(probs, labels);
  CHECK(c.threshold == doctest::Approx(0.25));
  CHECK(c.f1 == doctest::Approx(6.0 / 7.0));

  // Every threshold from 0.15 to 0.90 is perfect; the lowest wins.
  const ThresholdChoice easy = select_threshold(std::vector<double>{0.9, 0.9, 0.1, 0.1}, std::vector<int>{1, 1, 0, 0});
  CHECK(easy.threshold == doctest::Approx(0.15));
  CHECK(easy.f1 == 1.0);
  CHECK(threshold_grid().size() == 19);
}

TEST_CASE("cross-validation is deterministic and skips single-class folds") {
  const FeatureMatrix x = {{-2.0}, {-1.0}, {1.0}, {2.0}};
  const std::vector<int> y = {0, 0, 1, 1};
  const std::vector<double> grid = {1e-3, 1e-1};
  const CrossValidation a = cross_validate_binary(x, y, 2, grid, 5);
  const CrossValidation b = cross_validate_binary(x, y, 2, grid, 5);
  CHECK(a.l2 == b.l2);
  CHECK(a.threshold == b.threshold);
  CHECK(a.mean_f1 == b.mean_f1);

  // One positive among six: every fold has a single-class side.
  const FeatureMatrix x6 = {{-3.0}, {-2.0}, {-1.0}, {1.0}, {2.0}, {3.0}};
  CHECK_THROWS_AS(cross_validate_binary(x6, std::vector<int>{0, 0, 0, 0, 0, 1}, 3, grid, 1), ContractError);

  // Two positives among six, three folds of two: some shuffles leave a fold
  // holding out two negatives, which is skipped while the others are used.
  const std::vector<int> y6 = {0, 0, 0, 0, 1, 1};
  bool saw_partial = false;
  for (std::uint64_t seed = 0; seed < 50 && !saw_partial; ++seed) {
    std::ostringstream warnings;
    try {
      const CrossValidation c = cross_validate_binary(x6, y6, 3, grid, seed, {}, &warnings);
      if (c.folds_used > 0 && c.folds_used < 3) {
        saw_partial = true;
        CHECK(warnings.str().find("single class") != std::string::npos);
      }
    } catch (const ContractError&) {
    }
  }
  CHECK(saw_partial);
  CHECK_THROWS_AS(cross_validate_binary(x, y, 1, grid, 0), ContractError);
}

TEST_CASE("separable clusters give near-perfect paraphrase and sentiment scores") {
  Rng rng(1234);
  const std::size_t dim = 8;
  auto random_embedding = [&rng, dim] {
    std::vector<Real> v(dim);
    for (Real& x : v) x = rng.normal();
    return v;
  };
  auto paraphrase_set = [&](std::size_t n, FeatureMatrix& x, std::vector<int>& y) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::vector<Real> r = random_embedding();
      std::vector<Real> s;
      const int label = static_cast<int>(i % 2);
      if (label == 1) {
        s = r;
        for (Real& v : s) v += 0.05 * rng.normal();
      } else {
        s = random_embedding();
      }
      x.push_back(pair_features(TweetEmbedding(r), TweetEmbedding(s)));
      y.push_back(label);
    }
  };
  FeatureMatrix tx, ex;
  std::vector<int> ty, ey;
  paraphrase_set(200, tx, ty);
  paraphrase_set(200, ex, ey);
  const ParaphraseReport p = eval_paraphrase(tx, ty, ex, ey, EvalOptions{});
  CHECK(p.scores.f1 >= 0.95);

  std::vector<std::vector<double>> centers(3, std::vector<double>(dim, 0.0));
  for (std::size_t c = 0; c < 3; ++c) centers[c][c] = 4.0;
  std::vector<int> sy, syt;
  const FeatureMatrix sx = testing::gaussian_clusters(centers, 60, 0.7, rng, sy);
  const FeatureMatrix sxt = testing::gaussian_clusters(centers, 60, 0.7, rng, syt);
  const SentimentReport s = eval_sentiment(sx, sy, sxt, syt, EvalOptions{});
  CHECK(s.averaged_f1 >= 0.95);
  CHECK(s.averaged_f1 == doctest::Approx(averaged_f1(s.positive.f1, s.negative.f1)));

  std::vector<int> two_classes = sy;
  for (int& v : two_classes) v = v == 1 ? 0 : v;
  CHECK_THROWS_AS(eval_sentiment(sx, two_classes, sxt, syt, EvalOptions{}), ContractError);
}

TEST_CASE("dataset readers and report output") {
  const fs::path para = scratch("para.tsv"), senti = scratch("senti.tsv"), bad = scratch("bad.tsv");
  write_file(para, "a b\tc d\t1\r\ne f\tg h\t0\n\n");
  write_file(senti, "great day\tPositive\nmeh\tneutral\nawful\tnegative\n");
  write_file(bad, "only one column\n");
  const auto p = load_paraphrase_tsv(para.string());
  REQUIRE(p.size() == 2);
  CHECK(p[0].text_b == "c d");
  CHECK(p[0].label == 1);
  const auto s = load_sentiment_tsv(senti.string());
  REQUIRE(s.size() == 3);
  CHECK(s[0].label == Sentiment::kPositive);
  CHECK_THROWS_AS(load_paraphrase_tsv(bad.string()), IoError);
  CHECK_THROWS_AS(load_sentiment_tsv(bad.string()), IoError);
  CHECK_THROWS_AS(load_sentiment_tsv("/nonexistent.tsv"), IoError);

  CHECK(format_report(PrfScores{0.5, 0.25, 1.0 / 3.0}) == "P=0.5000 R=0.2500 F1=0.3333");
  const fs::path kv = scratch("report.txt");
  write_key_values(kv.string(), report_key_values(ParaphraseReport{{1, 1, 1}, 0.35, 0.01}));
  std::ifstream in(kv);
  std::stringstream text;
  text << in.rdbuf();
  CHECK(text.str().find("threshold=") != std::string::npos);
}
