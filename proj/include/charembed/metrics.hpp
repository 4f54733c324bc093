#pragma once

#include <span>

namespace charembed {

struct PrfScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Counts against one positive class. Empty denominators give 0: P when
// nothing is predicted positive, R when no label is positive, F1 when P+R=0.
// Throws DimensionError when the spans differ in length.
PrfScores precision_recall_f1(std::span<const int> predictions, std::span<const int> labels, int positive_class);

// (F1_pos + F1_neg) / 2.
inline double averaged_f1(double f1_positive, double f1_negative) { return 0.5 * (f1_positive + f1_negative); }

}  // namespace charembed
