#include "charembed/adam.hpp"

#include <cmath>

#include "charembed/errors.hpp"

namespace charembed {

AdamState AdamState::for_params(const ParamStore& params, AdamHyper hyper) {
  return AdamState{params.zeros_like(), params.zeros_like(), 0, hyper};
}

void adam_step(ParamStore& params, const ParamStore& grads, AdamState& state) {
  for (const auto& [name, value] : params.entries()) {
    if (!grads.contains(name)) throw ContractError("missing gradient for parameter '" + name + "'");
    if (grads.get(name).shape() != value.shape()) {
      throw ContractError("gradient shape mismatch for parameter '" + name + "'");
    }
  }
  const AdamHyper& h = state.hyper;
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(h.beta1, t);
  const double correction2 = 1.0 - std::pow(h.beta2, t);
  for (auto& [name, value] : params.entries()) {
    const Tensor& g = grads.get(name);
    Tensor& m = state.first_moment.get(name);
    Tensor& v = state.second_moment.get(name);
    for (std::size_t i = 0; i < value.size(); ++i) {
      m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g[i];
      v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      value[i] -= h.learning_rate * m_hat / (std::sqrt(v_hat) + h.epsilon);
    }
  }
}

double clip_global_norm(ParamStore& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& [name, g] : grads.entries()) {
    for (Real x : g.values()) sq += x * x;
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double factor = max_norm / norm;
    for (auto& [name, g] : grads.entries()) {
      for (Real& x : g.values()) x *= factor;
    }
  }
  return norm;
}

}  // namespace charembed
