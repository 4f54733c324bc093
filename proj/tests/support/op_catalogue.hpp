#pragma once

// One random-instance generator per differentiable operation. Each call draws
// fresh sizes and values from the generator and returns the gradient check of
// that instance.

#include <string>
#include <vector>

#include "support/gradcheck.hpp"

namespace charembed::testing {

struct OpCase {
  std::string name;
  std::function<GradCheckReport(Rng&)> check;
};

inline std::size_t draw(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
}

inline std::vector<OpCase> op_catalogue() {
  std::vector<OpCase> cases;

  cases.push_back({"conv1d", [](Rng& rng) {
                     const std::size_t m = draw(rng, 1, 4), stride = draw(rng, 1, 3);
                     const std::size_t length = m + draw(rng, 0, 8), cin = draw(rng, 1, 4), cout = draw(rng, 1, 4);
                     return gradcheck({random_tensor({length, cin}, rng), random_tensor({cout, m, cin}, rng),
                                       random_tensor({cout}, rng)},
                                      [stride](Tape&, const std::vector<Var>& v) {
                                        return ops::conv1d(v[0], v[1], v[2], stride);
                                      },
                                      rng);
                   }});

  cases.push_back({"maxpool1d", [](Rng& rng) {
                     const std::size_t window = draw(rng, 1, 4), stride = draw(rng, 1, 4);
                     const std::size_t length = window + draw(rng, 0, 9), channels = draw(rng, 1, 4);
                     return gradcheck({distinct_tensor({length, channels}, rng)},
                                      [window, stride](Tape&, const std::vector<Var>& v) {
                                        return ops::maxpool1d(v[0], window, stride);
                                      },
                                      rng);
                   }});

  cases.push_back({"lstm_cell", [](Rng& rng) {
                     const std::size_t n = draw(rng, 1, 5), d = draw(rng, 1, 5);
                     std::vector<Tensor> in = {random_tensor({d}, rng), random_tensor({n}, rng),
                                               random_tensor({n}, rng)};
                     for (int g = 0; g < 4; ++g) in.push_back(random_tensor({n, n + d}, rng));
                     for (int g = 0; g < 4; ++g) in.push_back(random_tensor({n}, rng));
                     return gradcheck(in,
                                      [](Tape&, const std::vector<Var>& v) {
                                        const ops::LstmWeights w{v[3], v[4], v[5], v[6], v[7], v[8], v[9], v[10]};
                                        const ops::LstmState s = ops::lstm_cell(v[0], {v[1], v[2]}, w);
                                        const Var parts[] = {s.h, s.c};
                                        return ops::concat(parts);
                                      },
                                      rng);
                   }});

  cases.push_back({"softmax", [](Rng& rng) {
                     return gradcheck({random_tensor({draw(rng, 1, 8)}, rng, -3.0, 3.0)},
                                      [](Tape&, const std::vector<Var>& v) { return ops::softmax(v[0]); }, rng);
                   }});

  cases.push_back({"cross_entropy", [](Rng& rng) {
                     const std::size_t k = draw(rng, 2, 8);
                     Tensor target({k});
                     target[rng.below(k)] = 1.0;
                     return gradcheck({target, random_tensor({k}, rng, 0.05, 1.0)},
                                      [](Tape&, const std::vector<Var>& v) { return ops::cross_entropy(v[0], v[1]); },
                                      rng, {false, true});
                   }});

  cases.push_back({"dropout", [](Rng& rng) {
                     const std::uint64_t mask_seed = rng.next_u64();
                     const double rho = rng.uniform(0.1, 0.9);
                     return gradcheck({random_tensor({draw(rng, 1, 12)}, rng)},
                                      [mask_seed, rho](Tape&, const std::vector<Var>& v) {
                                        Rng mask_rng(mask_seed);
                                        return ops::dropout(v[0], rho, true, mask_rng);
                                      },
                                      rng);
                   }});

  cases.push_back({"relu", [](Rng& rng) {
                     return gradcheck({away_from_zero({draw(rng, 1, 4), draw(rng, 1, 4)}, rng)},
                                      [](Tape&, const std::vector<Var>& v) { return ops::relu(v[0]); }, rng);
                   }});

  cases.push_back({"tanh", [](Rng& rng) {
                     return gradcheck({random_tensor({draw(rng, 1, 4), draw(rng, 1, 4)}, rng, -3.0, 3.0)},
                                      [](Tape&, const std::vector<Var>& v) { return ops::tanh(v[0]); }, rng);
                   }});

  cases.push_back({"sigmoid", [](Rng& rng) {
                     return gradcheck({random_tensor({draw(rng, 1, 4), draw(rng, 1, 4)}, rng, -4.0, 4.0)},
                                      [](Tape&, const std::vector<Var>& v) { return ops::sigmoid(v[0]); }, rng);
                   }});

  cases.push_back({"matmul", [](Rng& rng) {
                     const std::size_t m = draw(rng, 1, 5), k = draw(rng, 1, 5), n = draw(rng, 1, 5);
                     const bool vector_rhs = rng.below(2) == 0;
                     const Shape rhs = vector_rhs ? Shape{k} : Shape{k, n};
                     return gradcheck({random_tensor({m, k}, rng), random_tensor(rhs, rng)},
                                      [](Tape&, const std::vector<Var>& v) { return ops::matmul(v[0], v[1]); }, rng);
                   }});

  cases.push_back({"add", [](Rng& rng) {
                     const Shape s = {draw(rng, 1, 4), draw(rng, 1, 4)};
                     return gradcheck({random_tensor(s, rng), random_tensor(s, rng)},
                                      [](Tape&, const std::vector<Var>& v) { return ops::add(v[0], v[1]); }, rng);
                   }});

  cases.push_back({"mul", [](Rng& rng) {
                     const Shape s = {draw(rng, 1, 4), draw(rng, 1, 4)};
                     return gradcheck({random_tensor(s, rng), random_tensor(s, rng)},
                                      [](Tape&, const std::vector<Var>& v) { return ops::mul(v[0], v[1]); }, rng);
                   }});

  cases.push_back({"scale", [](Rng& rng) {
                     const double factor = rng.uniform(-3.0, 3.0);
                     return gradcheck({random_tensor({draw(rng, 1, 6)}, rng)},
                                      [factor](Tape&, const std::vector<Var>& v) { return ops::scale(v[0], factor); },
                                      rng);
                   }});

  cases.push_back({"concat", [](Rng& rng) {
                     const std::size_t parts = draw(rng, 1, 4);
                     std::vector<Tensor> in;
                     for (std::size_t p = 0; p < parts; ++p) in.push_back(random_tensor({draw(rng, 1, 4)}, rng));
                     return gradcheck(in, [](Tape&, const std::vector<Var>& v) { return ops::concat(v); }, rng);
                   }});

  cases.push_back({"row", [](Rng& rng) {
                     const std::size_t rows = draw(rng, 1, 5);
                     const std::size_t r = static_cast<std::size_t>(rng.below(rows));
                     return gradcheck({random_tensor({rows, draw(rng, 1, 4)}, rng)},
                                      [r](Tape&, const std::vector<Var>& v) { return ops::row(v[0], r); }, rng);
                   }});

  cases.push_back({"sum", [](Rng& rng) {
                     return gradcheck({random_tensor({draw(rng, 1, 4), draw(rng, 1, 4)}, rng)},
                                      [](Tape&, const std::vector<Var>& v) { return ops::sum(v[0]); }, rng);
                   }});

  cases.push_back({"mean", [](Rng& rng) {
                     const std::size_t n = draw(rng, 1, 6);
                     std::vector<Tensor> in;
                     for (std::size_t i = 0; i < n; ++i) in.push_back(random_tensor({1}, rng));
                     return gradcheck(in, [](Tape&, const std::vector<Var>& v) { return ops::mean(v); }, rng);
                   }});

  return cases;
}

}  // namespace charembed::testing
