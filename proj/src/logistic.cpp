#include "charembed/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "charembed/errors.hpp"
#include "charembed/metrics.hpp"
#include "charembed/rng.hpp"

namespace charembed {
namespace {

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Objective over a flattened parameter vector [weights..., bias...].
class Objective {
 public:
  Objective(const FeatureMatrix& x, std::span<const int> y, std::size_t classes, double l2)
      : x_(x), y_(y), classes_(classes), rows_(classes == 2 ? 1 : classes), dim_(x.front().size()), l2_(l2) {}

  std::size_t size() const { return rows_ * dim_ + rows_; }

  // Returns f(theta); fills grad when non-null.
  double evaluate(const std::vector<double>& theta, std::vector<double>* grad) const {
    const std::size_t n = x_.size();
    const double inv_n = 1.0 / static_cast<double>(n);
    if (grad) grad->assign(size(), 0.0);
    double loss = 0.0;
    std::vector<double> z(rows_);
    for (std::size_t i = 0; i < n; ++i) {
      const std::vector<double>& xi = x_[i];
      for (std::size_t r = 0; r < rows_; ++r) {
        const double* w = theta.data() + r * dim_;
        z[r] = theta[rows_ * dim_ + r] + std::inner_product(xi.begin(), xi.end(), w, 0.0);
      }
      if (rows_ == 1) {
        const double yi = y_[i] == 1 ? 1.0 : 0.0;
        loss += softplus(z[0]) - yi * z[0];
        if (grad) accumulate(*grad, 0, (sigmoid(z[0]) - yi) * inv_n, xi);
      } else {
        const double peak = *std::max_element(z.begin(), z.end());
        double total = 0.0;
        for (double v : z) total += std::exp(v - peak);
        const double lse = peak + std::log(total);
        loss += lse - z[static_cast<std::size_t>(y_[i])];
        if (grad) {
          for (std::size_t r = 0; r < rows_; ++r) {
            const double p = std::exp(z[r] - lse);
            const double target = static_cast<std::size_t>(y_[i]) == r ? 1.0 : 0.0;
            accumulate(*grad, r, (p - target) * inv_n, xi);
          }
        }
      }
    }
    loss *= inv_n;
    double sq = 0.0;
    for (std::size_t j = 0; j < rows_ * dim_; ++j) {
      sq += theta[j] * theta[j];
      if (grad) (*grad)[j] += l2_ * theta[j];
    }
    return loss + 0.5 * l2_ * sq;
  }

 private:
  void accumulate(std::vector<double>& grad, std::size_t r, double coeff, const std::vector<double>& xi) const {
    double* g = grad.data() + r * dim_;
    for (std::size_t j = 0; j < dim_; ++j) g[j] += coeff * xi[j];
    grad[rows_ * dim_ + r] += coeff;
  }

  const FeatureMatrix& x_;
  std::span<const int> y_;
  std::size_t classes_;
  std::size_t rows_;
  std::size_t dim_;
  double l2_;
};

std::size_t class_count(std::span<const int> labels) {
  std::set<int> distinct;
  int top = 0;
  for (int y : labels) {
    if (y < 0) throw ContractError("class labels must be non-negative");
    distinct.insert(y);
    top = std::max(top, y);
  }
  if (distinct.size() < 2) throw ContractError("logistic regression needs at least two classes present");
  return static_cast<std::size_t>(top) + 1;
}

LogisticModel unpack(const std::vector<double>& theta, std::size_t classes, std::size_t dim) {
  LogisticModel m;
  m.classes = classes;
  m.dim = dim;
  const std::size_t rows = m.rows();
  m.weights.assign(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(rows * dim));
  m.bias.assign(theta.begin() + static_cast<std::ptrdiff_t>(rows * dim), theta.end());
  return m;
}

std::vector<double> pack(const LogisticModel& m) {
  std::vector<double> theta = m.weights;
  theta.insert(theta.end(), m.bias.begin(), m.bias.end());
  return theta;
}

FeatureMatrix subset(const FeatureMatrix& x, const std::vector<std::size_t>& idx) {
  FeatureMatrix out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(x[i]);
  return out;
}

std::vector<int> subset(std::span<const int> y, const std::vector<std::size_t>& idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(y[i]);
  return out;
}

bool single_class(const std::vector<int>& y) {
  return std::all_of(y.begin(), y.end(), [&y](int v) { return v == y.front(); });
}

}  // namespace

std::vector<double> LogisticModel::probabilities(std::span<const double> x) const {
  if (x.size() != dim) throw DimensionError("feature length does not match the model");
  std::vector<double> z(rows());
  for (std::size_t r = 0; r < rows(); ++r) {
    z[r] = bias[r] + std::inner_product(x.begin(), x.end(), weights.begin() + static_cast<std::ptrdiff_t>(r * dim), 0.0);
  }
  if (classes == 2) {
    const double p = sigmoid(z[0]);
    return {1.0 - p, p};
  }
  const double peak = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (double& v : z) {
    v = std::exp(v - peak);
    total += v;
  }
  for (double& v : z) v /= total;
  return z;
}

double LogisticModel::positive_probability(std::span<const double> x) const {
  if (classes != 2) throw ContractError("positive_probability is only defined for binary models");
  return probabilities(x)[1];
}

int LogisticModel::predict(std::span<const double> x) const {
  if (classes == 2) return positive_probability(x) >= threshold ? 1 : 0;
  const std::vector<double> p = probabilities(x);
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

double logistic_objective(const LogisticModel& model, const FeatureMatrix& features, std::span<const int> labels,
                          double l2) {
  if (features.empty() || features.size() != labels.size()) {
    throw DimensionError("features and labels must be non-empty and equal in length");
  }
  return Objective(features, labels, model.classes, l2).evaluate(pack(model), nullptr);
}

LogisticModel train_logistic(const FeatureMatrix& features, std::span<const int> labels,
                             const LogisticOptions& options, std::vector<double>* trace) {
  if (features.empty() || features.size() != labels.size()) {
    throw DimensionError("features and labels must be non-empty and equal in length");
  }
  const std::size_t dim = features.front().size();
  for (const auto& row : features) {
    if (row.size() != dim) throw DimensionError("feature rows differ in length");
  }
  if (options.l2 < 0.0) throw ContractError("l2 strength must be non-negative");
  const std::size_t classes = class_count(labels);

  const Objective objective(features, labels, classes, options.l2);
  std::vector<double> theta(objective.size(), 0.0);
  std::vector<double> grad, candidate(theta.size());
  double f = objective.evaluate(theta, &grad);
  double step = 1.0;
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    const double g2 = std::inner_product(grad.begin(), grad.end(), grad.begin(), 0.0);
    if (std::sqrt(g2) < options.gradient_tolerance) break;
    step = std::min(step * 2.0, 1e6);
    double f_new = 0.0;
    bool accepted = false;
    while (step > 1e-20) {
      for (std::size_t j = 0; j < theta.size(); ++j) candidate[j] = theta[j] - step * grad[j];
      f_new = objective.evaluate(candidate, nullptr);
      if (f_new <= f - 1e-4 * step * g2) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    theta.swap(candidate);
    f = objective.evaluate(theta, &grad);
    if (trace) trace->push_back(f);
  }
  return unpack(theta, classes, dim);
}

std::vector<double> threshold_grid() {
  std::vector<double> grid;
  for (int k = 1; k <= 19; ++k) grid.push_back(0.05 * k);
  return grid;
}

ThresholdChoice select_threshold(std::span<const double> probs, std::span<const int> labels) {
  if (probs.size() != labels.size()) throw DimensionError("probabilities and labels differ in length");
  ThresholdChoice best{0.0, -1.0};
  std::vector<int> predicted(probs.size());
  for (double theta : threshold_grid()) {
    for (std::size_t i = 0; i < probs.size(); ++i) predicted[i] = probs[i] >= theta ? 1 : 0;
    const double f1 = precision_recall_f1(predicted, labels, 1).f1;
    if (f1 > best.f1) best = {theta, f1};
  }
  return best;
}

CrossValidation cross_validate_binary(const FeatureMatrix& features, std::span<const int> labels, std::size_t folds,
                                      std::span<const double> l2_grid, std::uint64_t seed,
                                      const LogisticOptions& base, std::ostream* warnings) {
  if (folds < 2) throw ContractError("cross-validation needs at least two folds");
  if (features.size() != labels.size()) throw DimensionError("features and labels differ in length");
  if (l2_grid.empty()) throw ContractError("empty l2 grid");

  std::vector<std::size_t> order(features.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  shuffle(order, rng);
  std::vector<std::vector<std::size_t>> held_out(folds), training(folds);
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    for (std::size_t k = 0; k < folds; ++k) (pos % folds == k ? held_out[k] : training[k]).push_back(order[pos]);
  }
  std::vector<bool> usable(folds, true);
  std::size_t folds_used = 0;
  for (std::size_t k = 0; k < folds; ++k) {
    const std::vector<int> y_train = subset(labels, training[k]);
    const std::vector<int> y_test = subset(labels, held_out[k]);
    if (y_train.empty() || y_test.empty() || single_class(y_train) || single_class(y_test)) {
      usable[k] = false;
      if (warnings) *warnings << "warning: skipping cross-validation fold " << k + 1 << " (single class)\n";
    } else {
      ++folds_used;
    }
  }
  if (folds_used == 0) throw ContractError("every cross-validation fold holds a single class");

  const std::vector<double> grid = threshold_grid();
  CrossValidation best;
  best.mean_f1 = -1.0;
  for (double l2 : l2_grid) {
    std::vector<double> f1_sum(grid.size(), 0.0);
    LogisticOptions opts = base;
    opts.l2 = l2;
    for (std::size_t k = 0; k < folds; ++k) {
      if (!usable[k]) continue;
      const LogisticModel model =
          train_logistic(subset(features, training[k]), subset(labels, training[k]), opts);
      const std::vector<int> y_test = subset(labels, held_out[k]);
      std::vector<double> probs;
      for (std::size_t i : held_out[k]) probs.push_back(model.positive_probability(features[i]));
      std::vector<int> predicted(probs.size());
      for (std::size_t t = 0; t < grid.size(); ++t) {
        for (std::size_t i = 0; i < probs.size(); ++i) predicted[i] = probs[i] >= grid[t] ? 1 : 0;
        f1_sum[t] += precision_recall_f1(predicted, y_test, 1).f1;
      }
    }
    for (std::size_t t = 0; t < grid.size(); ++t) {
      const double mean = f1_sum[t] / static_cast<double>(folds_used);
      if (mean > best.mean_f1) best = {l2, grid[t], mean, folds_used};
    }
  }
  return best;
}

double tune_threshold(const LogisticOptions& options, const FeatureMatrix& features, std::span<const int> labels,
                      std::size_t folds, std::uint64_t seed, std::ostream* warnings) {
  const double l2[] = {options.l2};
  return cross_validate_binary(features, labels, folds, l2, seed, options, warnings).threshold;
}

}  // namespace charembed
