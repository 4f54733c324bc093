#pragma once

#include <cstdint>

#include "charembed/model.hpp"

namespace charembed {

struct AdamHyper {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// First and second moments per parameter, plus the step counter t.
struct AdamState {
  ParamStore first_moment;
  ParamStore second_moment;
  std::uint64_t step = 0;
  AdamHyper hyper;

  static AdamState for_params(const ParamStore& params, AdamHyper hyper = {});
};

// One bias-corrected Adam update:
//   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2,
//   theta <- theta - lr * m_hat / (sqrt(v_hat) + eps)
// Throws ContractError when grads lacks a parameter or a shape differs.
void adam_step(ParamStore& params, const ParamStore& grads, AdamState& state);

// Rescales grads in place so their global L2 norm is at most max_norm.
// Returns the norm before clipping.
double clip_global_norm(ParamStore& grads, double max_norm);

}  // namespace charembed
