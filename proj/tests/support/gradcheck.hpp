#pragma once

// Finite-difference gradient checking shared by the unit tests and the
// acceptance binary.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "charembed/ops.hpp"
#include "charembed/rng.hpp"
#include "charembed/tape.hpp"

namespace charembed::testing {

// Builds an op's output (any shape) from its inputs on the given tape.
using OpBuilder = std::function<Var(Tape&, const std::vector<Var>&)>;

struct GradCheckReport {
  // Worst, over differentiable inputs, of ||analytic - numeric||_2 divided by
  // max(||analytic||_2, ||numeric||_2). Zero when both vanish.
  double max_relative_error = 0.0;
  double max_abs_error = 0.0;
};

inline Tensor random_tensor(const Shape& shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(shape);
  for (auto& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

// The output is reduced to a scalar by a fixed random projection so every
// output element contributes with a distinct weight.
inline GradCheckReport gradcheck(const std::vector<Tensor>& inputs, const OpBuilder& build, Rng& rng,
                                 std::vector<bool> differentiable = {}, double step = 1e-5) {
  if (differentiable.empty()) differentiable.assign(inputs.size(), true);

  Tensor projection;
  {
    Tape probe;
    std::vector<Var> vars;
    for (const Tensor& t : inputs) vars.push_back(probe.constant(t));
    projection = random_tensor(build(probe, vars).shape(), rng);
  }

  auto loss_at = [&](const std::vector<Tensor>& values) {
    Tape tape;
    std::vector<Var> vars;
    for (const Tensor& t : values) vars.push_back(tape.constant(t));
    const Tensor out = build(tape, vars).value();
    double total = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) total += out[i] * projection[i];
    return total;
  };

  Tape tape;
  std::vector<Var> vars;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    vars.push_back(differentiable[k] ? tape.variable(inputs[k]) : tape.constant(inputs[k]));
  }
  const Var out = build(tape, vars);
  const Var loss = ops::sum(ops::mul(out, tape.constant(projection)));
  tape.backward(loss);

  GradCheckReport report;
  std::vector<Tensor> probe = inputs;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    if (!differentiable[k]) continue;
    const Tensor analytic = tape.grad(vars[k].id);
    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      const double saved = probe[k][i];
      probe[k][i] = saved + step;
      const double up = loss_at(probe);
      probe[k][i] = saved - step;
      const double down = loss_at(probe);
      probe[k][i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double d = analytic[i] - numeric;
      diff2 += d * d;
      a2 += analytic[i] * analytic[i];
      n2 += numeric * numeric;
      report.max_abs_error = std::max(report.max_abs_error, std::abs(d));
    }
    const double denom = std::sqrt(std::max(a2, n2));
    if (denom > 0.0) report.max_relative_error = std::max(report.max_relative_error, std::sqrt(diff2) / denom);
  }
  return report;
}

// Values whose pairwise gaps are at least `gap`, in random order. Keeps
// finite differences away from max-pool ties.
inline Tensor distinct_tensor(const Shape& shape, Rng& rng, double gap = 0.01) {
  Tensor t(shape);
  std::vector<std::size_t> order(t.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  shuffle(order, rng);
  for (std::size_t i = 0; i < order.size(); ++i) {
    t[i] = gap * static_cast<double>(order[i]) - 0.5 * gap * static_cast<double>(order.size());
  }
  return t;
}

// Uniform in [-1, 1] with |x| >= margin. Keeps finite differences off the
// ReLU kink.
inline Tensor away_from_zero(const Shape& shape, Rng& rng, double margin = 1e-3) {
  Tensor t(shape);
  for (auto& v : t.values()) {
    do {
      v = rng.uniform(-1.0, 1.0);
    } while (std::abs(v) < margin);
  }
  return t;
}

}  // namespace charembed::testing
