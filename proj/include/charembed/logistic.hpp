#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

namespace charembed {

using FeatureMatrix = std::vector<std::vector<double>>;

// Binary models keep a single weight row scored with a sigmoid and a
// decision threshold; multiclass models keep one row per class and a softmax.
struct LogisticModel {
  std::size_t classes = 2;
  std::size_t dim = 0;
  std::vector<double> weights;  // rows x dim, rows = 1 (binary) or classes
  std::vector<double> bias;     // rows
  double threshold = 0.5;

  std::size_t rows() const { return classes == 2 ? 1 : classes; }
  // Class probabilities, length `classes`.
  std::vector<double> probabilities(std::span<const double> x) const;
  // Binary: P(class 1). Multiclass: throws ContractError.
  double positive_probability(std::span<const double> x) const;
  // Binary: P(1) >= threshold. Multiclass: argmax, lowest index on ties.
  int predict(std::span<const double> x) const;
};

struct LogisticOptions {
  double l2 = 1e-3;
  std::size_t max_iterations = 10000;
  double gradient_tolerance = 1e-6;
};

// Mean negative log-likelihood plus l2/2 * ||weights||^2 (bias unpenalized).
double logistic_objective(const LogisticModel& model, const FeatureMatrix& features, std::span<const int> labels,
                          double l2);

// Full-batch gradient descent with Armijo backtracking, from zero weights,
// until the gradient norm drops below the tolerance or the iteration cap.
// Labels are 0..K-1; at least two distinct classes are required
// (ContractError otherwise). Appends the objective after each accepted step
// to `trace` when given.
LogisticModel train_logistic(const FeatureMatrix& features, std::span<const int> labels,
                             const LogisticOptions& options = {}, std::vector<double>* trace = nullptr);

// Thresholds 0.05, 0.10, ..., 0.95.
std::vector<double> threshold_grid();

struct ThresholdChoice {
  double threshold = 0.5;
  double f1 = 0.0;
};

// Highest positive-class F1 on the grid; ties go to the lower threshold.
ThresholdChoice select_threshold(std::span<const double> positive_probabilities, std::span<const int> labels);

struct CrossValidation {
  double l2 = 0.0;
  double threshold = 0.5;
  double mean_f1 = 0.0;
  std::size_t folds_used = 0;
};

// k-fold CV for a binary problem over the l2 grid and the threshold grid,
// maximizing mean positive-class F1 across folds. Folds are a seeded
// shuffle dealt round-robin. A fold whose training or held-out part holds a
// single class is skipped with a warning on `warnings`. Ties keep the
// earlier l2 and the lower threshold. Throws ContractError if folds < 2 or
// every fold is skipped.
CrossValidation cross_validate_binary(const FeatureMatrix& features, std::span<const int> labels, std::size_t folds,
                                      std::span<const double> l2_grid, std::uint64_t seed,
                                      const LogisticOptions& base = {}, std::ostream* warnings = nullptr);

// Threshold chosen by cross-validation at the model options' fixed l2.
double tune_threshold(const LogisticOptions& options, const FeatureMatrix& features, std::span<const int> labels,
                      std::size_t folds, std::uint64_t seed, std::ostream* warnings = nullptr);

}  // namespace charembed
