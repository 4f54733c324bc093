#pragma once

#include <cstddef>
#include <span>
#include <utility>

#include "charembed/rng.hpp"
#include "charembed/tape.hpp"

namespace charembed::ops {

// Temporal convolution over the row axis.
//   input  [L x Cin], kernel [Cout x m x Cin], bias [Cout]
//   output [Lout x Cout], Lout = (L - m) / stride + 1
// Output row y (0-based) reads input rows y*stride .. y*stride+m-1 with the
// kernel taps reversed: tap x touches row y*stride + m-1-x. This is the
// 1-based sum over x=1..m of k(x) f(y*s - x + c), c = m - s + 1, shifted to
// 0-based indices. Input channels are summed.
Var conv1d(Var input, Var kernel, Var bias, std::size_t stride);

// Temporal max-pooling over the row axis with the same window/offset layout as
// conv1d. Gradient goes to the first (lowest-index) maximum in each window.
Var maxpool1d(Var input, std::size_t window, std::size_t stride);

// Output length shared by conv1d and maxpool1d. Throws DimensionError when
// window > length or stride == 0.
std::size_t sliding_output_length(std::size_t length, std::size_t window, std::size_t stride);

struct LstmWeights {
  // Each gate weight is [hidden x (hidden + input)] over the concatenation
  // [h_prev, x]; biases are [hidden].
  Var w_input, w_forget, w_candidate, w_output;
  Var b_input, b_forget, b_candidate, b_output;
};

struct LstmState {
  Var h;
  Var c;
};

// One LSTM transition:
//   i = sigmoid(W_i [h, x] + b_i)    f = sigmoid(W_f [h, x] + b_f)
//   l = tanh(W_l [h, x] + b_l)       o = sigmoid(W_o [h, x] + b_o)
//   c' = f * c + i * l               h' = o * tanh(c')
LstmState lstm_cell(Var x, const LstmState& prev, const LstmWeights& weights);

// 1-d softmax with max subtraction. Throws NumericError on non-finite input.
Var softmax(Var logits);

// -sum p log q with q clamped below at kLogClamp. p must be one-hot.
inline constexpr Real kLogClamp = 1e-12;
Var cross_entropy(Var target_one_hot, Var probabilities);

// Inverted dropout: in training mode each element is zeroed with probability
// rho and survivors are scaled by 1 / (1 - rho). Inference mode, or rho == 0,
// returns the input node unchanged.
Var dropout(Var x, double rho, bool training, Rng& rng);

Var relu(Var x);
Var tanh(Var x);
Var sigmoid(Var x);

// [m x k] * [k x n] -> [m x n]; [m x k] * [k] -> [m].
Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var x, Real factor);
// Concatenation of 1-d tensors.
Var concat(std::span<const Var> parts);
// Row r of a 2-d tensor as a 1-d tensor.
Var row(Var x, std::size_t r);
// Sum of all elements -> scalar.
Var sum(Var x);
// Arithmetic mean of scalar nodes -> scalar.
Var mean(std::span<const Var> scalars);

}  // namespace charembed::ops
