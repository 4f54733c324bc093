#include "charembed/metrics.hpp"

#include <cstddef>

#include "charembed/errors.hpp"

namespace charembed {

PrfScores precision_recall_f1(std::span<const int> predictions, std::span<const int> labels, int positive_class) {
  if (predictions.size() != labels.size()) throw DimensionError("predictions and labels differ in length");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool predicted = predictions[i] == positive_class;
    const bool actual = labels[i] == positive_class;
    if (predicted && actual) ++tp;
    if (predicted && !actual) ++fp;
    if (!predicted && actual) ++fn;
  }
  PrfScores s;
  s.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  s.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

}  // namespace charembed
