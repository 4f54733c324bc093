#include "charembed/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "charembed/errors.hpp"

namespace charembed::ops {
namespace {

using Ids = std::vector<std::uint32_t>;

void require_rank(Var v, std::size_t rank, const char* op, const char* operand) {
  if (v.value().rank() != rank) {
    throw DimensionError(std::string(op) + ": " + operand + " must have rank " + std::to_string(rank) +
                         ", got " + shape_string(v.shape()));
  }
}

void require_same_shape(Var a, Var b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
  }
}

inline Real dot(const Real* a, const Real* b, std::size_t n) {
  Real acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

inline void axpy(Real alpha, const Real* x, Real* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

inline Real stable_sigmoid(Real x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const Real e = std::exp(x);
  return e / (1.0 + e);
}

// Shared shape for elementwise unary maps whose derivative is expressed via
// the output value.
template <typename Forward, typename DerivFromOutput>
Var unary(Var x, Forward forward, DerivFromOutput deriv) {
  Tensor out = x.value();
  for (Real& v : out.values()) v = forward(v);
  const std::uint32_t xid = x.id;
  return x.tape->record(std::move(out), {x}, [xid, deriv](Tape& t, const Ids& outs) {
    const Tensor& y = t.value(outs[0]);
    const Tensor& g = t.grad(outs[0]);
    Tensor& gx = t.grad_accumulator(xid);
    for (std::size_t i = 0; i < y.size(); ++i) gx[i] += g[i] * deriv(y[i], t.value(xid)[i]);
  });
}

}  // namespace

std::size_t sliding_output_length(std::size_t length, std::size_t window, std::size_t stride) {
  if (stride == 0) throw DimensionError("stride must be positive");
  if (window == 0) throw DimensionError("window must be positive");
  if (window > length) {
    throw DimensionError("window " + std::to_string(window) + " exceeds input length " +
                         std::to_string(length));
  }
  return (length - window) / stride + 1;
}

Var conv1d(Var input, Var kernel, Var bias, std::size_t stride) {
  require_rank(input, 2, "conv1d", "input");
  require_rank(kernel, 3, "conv1d", "kernel");
  require_rank(bias, 1, "conv1d", "bias");
  const Tensor& f = input.value();
  const Tensor& k = kernel.value();
  const std::size_t length = f.dim(0);
  const std::size_t channels_in = f.dim(1);
  const std::size_t channels_out = k.dim(0);
  const std::size_t window = k.dim(1);
  if (k.dim(2) != channels_in) {
    throw DimensionError("conv1d: kernel input channels " + std::to_string(k.dim(2)) +
                         " do not match input channels " + std::to_string(channels_in));
  }
  if (bias.value().dim(0) != channels_out) {
    throw DimensionError("conv1d: bias length does not match filter count");
  }
  const std::size_t out_len = sliding_output_length(length, window, stride);

  Tensor out({out_len, channels_out});
  const Real* fd = f.data();
  const Real* kd = k.data();
  const Real* bd = bias.value().data();
  for (std::size_t y = 0; y < out_len; ++y) {
    Real* orow = out.data() + y * channels_out;
    for (std::size_t o = 0; o < channels_out; ++o) {
      Real acc = bd[o];
      const Real* ko = kd + o * window * channels_in;
      for (std::size_t x = 0; x < window; ++x) {
        const std::size_t src = y * stride + window - 1 - x;
        acc += dot(ko + x * channels_in, fd + src * channels_in, channels_in);
      }
      orow[o] = acc;
    }
  }

  const std::uint32_t fid = input.id, kid = kernel.id, bid = bias.id;
  return input.tape->record(std::move(out), {input, kernel, bias}, [=](Tape& t, const Ids& outs) {
    const Tensor& g = t.grad(outs[0]);
    const Real* fv = t.value(fid).data();
    const Real* kv = t.value(kid).data();
    Real* gf = t.requires_grad(fid) ? t.grad_accumulator(fid).data() : nullptr;
    Real* gk = t.requires_grad(kid) ? t.grad_accumulator(kid).data() : nullptr;
    Real* gb = t.requires_grad(bid) ? t.grad_accumulator(bid).data() : nullptr;
    for (std::size_t y = 0; y < out_len; ++y) {
      for (std::size_t o = 0; o < channels_out; ++o) {
        const Real go = g.data()[y * channels_out + o];
        if (go == 0.0) continue;
        if (gb) gb[o] += go;
        for (std::size_t x = 0; x < window; ++x) {
          const std::size_t src = y * stride + window - 1 - x;
          const std::size_t koff = (o * window + x) * channels_in;
          if (gk) axpy(go, fv + src * channels_in, gk + koff, channels_in);
          if (gf) axpy(go, kv + koff, gf + src * channels_in, channels_in);
        }
      }
    }
  });
}

Var maxpool1d(Var input, std::size_t window, std::size_t stride) {
  require_rank(input, 2, "maxpool1d", "input");
  const Tensor& f = input.value();
  const std::size_t channels = f.dim(1);
  const std::size_t out_len = sliding_output_length(f.dim(0), window, stride);

  Tensor out({out_len, channels});
  std::vector<std::size_t> argmax(out_len * channels);
  for (std::size_t y = 0; y < out_len; ++y) {
    for (std::size_t ch = 0; ch < channels; ++ch) {
      std::size_t best = y * stride;
      for (std::size_t r = y * stride + 1; r < y * stride + window; ++r) {
        if (f.at(r, ch) > f.at(best, ch)) best = r;
      }
      argmax[y * channels + ch] = best;
      out.at(y, ch) = f.at(best, ch);
    }
  }

  const std::uint32_t fid = input.id;
  return input.tape->record(std::move(out), {input},
                            [fid, channels, argmax = std::move(argmax)](Tape& t, const Ids& outs) {
                              const Tensor& g = t.grad(outs[0]);
                              Tensor& gf = t.grad_accumulator(fid);
                              for (std::size_t i = 0; i < argmax.size(); ++i) {
                                gf.data()[argmax[i] * channels + i % channels] += g[i];
                              }
                            });
}

LstmState lstm_cell(Var x, const LstmState& prev, const LstmWeights& w) {
  require_rank(x, 1, "lstm_cell", "input");
  require_rank(prev.h, 1, "lstm_cell", "h_prev");
  require_rank(prev.c, 1, "lstm_cell", "c_prev");
  const std::size_t hidden = prev.h.value().dim(0);
  const std::size_t in_dim = x.value().dim(0);
  const std::size_t z_dim = hidden + in_dim;
  if (prev.c.value().dim(0) != hidden) throw DimensionError("lstm_cell: h_prev and c_prev differ in size");
  const Var gate_w[4] = {w.w_input, w.w_forget, w.w_candidate, w.w_output};
  const Var gate_b[4] = {w.b_input, w.b_forget, w.b_candidate, w.b_output};
  for (int g = 0; g < 4; ++g) {
    if (gate_w[g].shape() != Shape{hidden, z_dim}) {
      throw DimensionError("lstm_cell: gate weight must be " + shape_string({hidden, z_dim}) + ", got " +
                           shape_string(gate_w[g].shape()));
    }
    if (gate_b[g].shape() != Shape{hidden}) throw DimensionError("lstm_cell: gate bias must be [hidden]");
  }

  std::vector<Real> z(z_dim);
  std::copy_n(prev.h.value().data(), hidden, z.begin());
  std::copy_n(x.value().data(), in_dim, z.begin() + static_cast<std::ptrdiff_t>(hidden));

  // gates: [i | f | l | o], each of length hidden, post-activation.
  std::vector<Real> gates(4 * hidden);
  for (int g = 0; g < 4; ++g) {
    const Real* wd = gate_w[g].value().data();
    const Real* bd = gate_b[g].value().data();
    for (std::size_t j = 0; j < hidden; ++j) {
      const Real a = bd[j] + dot(wd + j * z_dim, z.data(), z_dim);
      gates[g * hidden + j] = (g == 2) ? std::tanh(a) : stable_sigmoid(a);
    }
  }
  Tensor c_next({hidden});
  Tensor h_next({hidden});
  std::vector<Real> tanh_c(hidden);
  const Real* c_prev = prev.c.value().data();
  for (std::size_t j = 0; j < hidden; ++j) {
    const Real i = gates[j], f = gates[hidden + j], l = gates[2 * hidden + j], o = gates[3 * hidden + j];
    c_next[j] = f * c_prev[j] + i * l;
    tanh_c[j] = std::tanh(c_next[j]);
    h_next[j] = o * tanh_c[j];
  }

  std::vector<std::uint32_t> w_ids, b_ids;
  for (int g = 0; g < 4; ++g) {
    w_ids.push_back(gate_w[g].id);
    b_ids.push_back(gate_b[g].id);
  }
  const std::uint32_t xid = x.id, hid = prev.h.id, cid = prev.c.id;
  std::vector<Tensor> outputs;
  outputs.push_back(std::move(h_next));
  outputs.push_back(std::move(c_next));
  auto rule = [=, z = std::move(z), gates = std::move(gates), tanh_c = std::move(tanh_c)](
                  Tape& t, const Ids& outs) {
    const bool have_gh = t.has_grad(outs[0]);
    const bool have_gc = t.has_grad(outs[1]);
    const Real* gh = have_gh ? t.grad(outs[0]).data() : nullptr;
    const Real* gc = have_gc ? t.grad(outs[1]).data() : nullptr;
    const Real* cp = t.value(cid).data();

    // Pre-activation gradients, [i | f | l | o].
    std::vector<Real> da(4 * hidden);
    std::vector<Real> dc_prev(hidden);
    for (std::size_t j = 0; j < hidden; ++j) {
      const Real i = gates[j], f = gates[hidden + j], l = gates[2 * hidden + j], o = gates[3 * hidden + j];
      const Real dh = gh ? gh[j] : 0.0;
      const Real dout = dh * tanh_c[j];
      const Real dc = (gc ? gc[j] : 0.0) + dh * o * (1.0 - tanh_c[j] * tanh_c[j]);
      da[j] = dc * l * i * (1.0 - i);
      da[hidden + j] = dc * cp[j] * f * (1.0 - f);
      da[2 * hidden + j] = dc * i * (1.0 - l * l);
      da[3 * hidden + j] = dout * o * (1.0 - o);
      dc_prev[j] = dc * f;
    }

    std::vector<Real> dz(z_dim, 0.0);
    for (int g = 0; g < 4; ++g) {
      const Real* wd = t.value(w_ids[g]).data();
      Real* gw = t.requires_grad(w_ids[g]) ? t.grad_accumulator(w_ids[g]).data() : nullptr;
      Real* gb = t.requires_grad(b_ids[g]) ? t.grad_accumulator(b_ids[g]).data() : nullptr;
      for (std::size_t j = 0; j < hidden; ++j) {
        const Real d = da[g * hidden + j];
        if (d == 0.0) continue;
        if (gb) gb[j] += d;
        if (gw) axpy(d, z.data(), gw + j * z_dim, z_dim);
        axpy(d, wd + j * z_dim, dz.data(), z_dim);
      }
    }
    if (t.requires_grad(hid)) axpy(1.0, dz.data(), t.grad_accumulator(hid).data(), hidden);
    if (t.requires_grad(xid)) axpy(1.0, dz.data() + hidden, t.grad_accumulator(xid).data(), in_dim);
    if (t.requires_grad(cid)) axpy(1.0, dc_prev.data(), t.grad_accumulator(cid).data(), hidden);
  };
  auto out = x.tape->record_multi(std::move(outputs),
                                  {x, prev.h, prev.c, w.w_input, w.w_forget, w.w_candidate, w.w_output,
                                   w.b_input, w.b_forget, w.b_candidate, w.b_output},
                                  std::move(rule));
  return LstmState{out[0], out[1]};
}

Var softmax(Var logits) {
  require_rank(logits, 1, "softmax", "logits");
  const Tensor& z = logits.value();
  if (!z.all_finite()) throw NumericError("softmax: non-finite logit");
  const Real peak = *std::max_element(z.values().begin(), z.values().end());
  Tensor out = z;
  Real total = 0.0;
  for (Real& v : out.values()) {
    v = std::exp(v - peak);
    total += v;
  }
  for (Real& v : out.values()) v /= total;

  const std::uint32_t zid = logits.id;
  return logits.tape->record(std::move(out), {logits}, [zid](Tape& t, const Ids& outs) {
    const Tensor& y = t.value(outs[0]);
    const Tensor& g = t.grad(outs[0]);
    const Real gy = dot(g.data(), y.data(), y.size());
    Tensor& gz = t.grad_accumulator(zid);
    for (std::size_t i = 0; i < y.size(); ++i) gz[i] += y[i] * (g[i] - gy);
  });
}

Var cross_entropy(Var target_one_hot, Var probabilities) {
  require_same_shape(target_one_hot, probabilities, "cross_entropy");
  const Tensor& p = target_one_hot.value();
  std::size_t hot = p.size();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 1.0 && hot == p.size()) {
      hot = i;
    } else if (p[i] != 0.0) {
      throw ContractError("cross_entropy: target is not one-hot");
    }
  }
  if (hot == p.size()) throw ContractError("cross_entropy: target is not one-hot");
  const Tensor& q = probabilities.value();
  const Real loss = -std::log(std::max(q[hot], kLogClamp));

  const std::uint32_t pid = target_one_hot.id, qid = probabilities.id;
  return probabilities.tape->record(Tensor::scalar(loss), {target_one_hot, probabilities},
                                    [pid, qid, hot](Tape& t, const Ids& outs) {
                                      const Real g = t.grad(outs[0])[0];
                                      const Tensor& qv = t.value(qid);
                                      if (t.requires_grad(qid) && qv[hot] > kLogClamp) {
                                        t.grad_accumulator(qid)[hot] -= g / qv[hot];
                                      }
                                      if (t.requires_grad(pid)) {
                                        Tensor& gp = t.grad_accumulator(pid);
                                        for (std::size_t i = 0; i < qv.size(); ++i) {
                                          gp[i] -= g * std::log(std::max(qv[i], kLogClamp));
                                        }
                                      }
                                    });
}

Var dropout(Var x, double rho, bool training, Rng& rng) {
  if (!(rho >= 0.0 && rho < 1.0)) throw ContractError("dropout: rho must lie in [0, 1)");
  if (!training || rho == 0.0) return x;
  const Real keep_scale = 1.0 / (1.0 - rho);
  std::vector<Real> mask(x.value().size());
  for (Real& m : mask) m = rng.uniform() < rho ? 0.0 : keep_scale;
  Tensor out = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  const std::uint32_t xid = x.id;
  return x.tape->record(std::move(out), {x}, [xid, mask = std::move(mask)](Tape& t, const Ids& outs) {
    const Tensor& g = t.grad(outs[0]);
    Tensor& gx = t.grad_accumulator(xid);
    for (std::size_t i = 0; i < mask.size(); ++i) gx[i] += g[i] * mask[i];
  });
}

Var relu(Var x) {
  return unary(
      x, [](Real v) { return v > 0.0 ? v : 0.0; }, [](Real y, Real) { return y > 0.0 ? 1.0 : 0.0; });
}

Var tanh(Var x) {
  return unary(
      x, [](Real v) { return std::tanh(v); }, [](Real y, Real) { return 1.0 - y * y; });
}

Var sigmoid(Var x) {
  return unary(x, stable_sigmoid, [](Real y, Real) { return y * (1.0 - y); });
}

Var matmul(Var a, Var b) {
  require_rank(a, 2, "matmul", "left operand");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const std::size_t m = av.dim(0), k = av.dim(1);
  if (bv.rank() != 1 && bv.rank() != 2) throw DimensionError("matmul: right operand must be rank 1 or 2");
  if (bv.dim(0) != k) {
    throw DimensionError("matmul: inner dimensions differ " + shape_string(av.shape()) + " * " +
                         shape_string(bv.shape()));
  }
  const std::size_t n = bv.rank() == 1 ? 1 : bv.dim(1);
  Tensor out(bv.rank() == 1 ? Shape{m} : Shape{m, n});
  for (std::size_t i = 0; i < m; ++i) {
    const Real* arow = av.data() + i * k;
    Real* orow = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) axpy(arow[p], bv.data() + p * n, orow, n);
  }
  const std::uint32_t aid = a.id, bid = b.id;
  return a.tape->record(std::move(out), {a, b}, [=](Tape& t, const Ids& outs) {
    const Real* g = t.grad(outs[0]).data();
    const Real* ad = t.value(aid).data();
    const Real* bd = t.value(bid).data();
    Real* ga = t.requires_grad(aid) ? t.grad_accumulator(aid).data() : nullptr;
    Real* gb = t.requires_grad(bid) ? t.grad_accumulator(bid).data() : nullptr;
    for (std::size_t i = 0; i < m; ++i) {
      const Real* grow = g + i * n;
      for (std::size_t p = 0; p < k; ++p) {
        if (ga) ga[i * k + p] += dot(grow, bd + p * n, n);
        if (gb) axpy(ad[i * k + p], grow, gb + p * n, n);
      }
    }
  });
}

Var add(Var a, Var b) {
  require_same_shape(a, b, "add");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  const std::uint32_t aid = a.id, bid = b.id;
  return a.tape->record(std::move(out), {a, b}, [aid, bid](Tape& t, const Ids& outs) {
    const Tensor& g = t.grad(outs[0]);
    for (std::uint32_t id : {aid, bid}) {
      if (!t.requires_grad(id)) continue;
      Tensor& gi = t.grad_accumulator(id);
      for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i];
    }
  });
}

Var mul(Var a, Var b) {
  require_same_shape(a, b, "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  const std::uint32_t aid = a.id, bid = b.id;
  return a.tape->record(std::move(out), {a, b}, [aid, bid](Tape& t, const Ids& outs) {
    const Tensor& g = t.grad(outs[0]);
    if (t.requires_grad(aid)) {
      Tensor& ga = t.grad_accumulator(aid);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * t.value(bid)[i];
    }
    if (t.requires_grad(bid)) {
      Tensor& gb = t.grad_accumulator(bid);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * t.value(aid)[i];
    }
  });
}

Var scale(Var x, Real factor) {
  Tensor out = x.value();
  for (Real& v : out.values()) v *= factor;
  const std::uint32_t xid = x.id;
  return x.tape->record(std::move(out), {x}, [xid, factor](Tape& t, const Ids& outs) {
    const Tensor& g = t.grad(outs[0]);
    Tensor& gx = t.grad_accumulator(xid);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * factor;
  });
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat: no inputs");
  Tape* tape = parts.front().tape;
  std::vector<Real> joined;
  std::vector<std::uint32_t> ids;
  std::vector<std::size_t> offsets;
  for (const Var& p : parts) {
    require_rank(p, 1, "concat", "part");
    if (p.tape != tape) throw ContractError("concat: inputs from different tapes");
    offsets.push_back(joined.size());
    ids.push_back(p.id);
    joined.insert(joined.end(), p.value().values().begin(), p.value().values().end());
  }
  const std::size_t total = joined.size();
  Tensor out({total}, std::move(joined));
  std::vector<Tensor> values;
  values.push_back(std::move(out));
  return tape
      ->record_multi(std::move(values), parts,
                     [ids, offsets](Tape& t, const Ids& outs) {
                       const Tensor& g = t.grad(outs[0]);
                       for (std::size_t p = 0; p < ids.size(); ++p) {
                         if (!t.requires_grad(ids[p])) continue;
                         Tensor& gp = t.grad_accumulator(ids[p]);
                         for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += g[offsets[p] + i];
                       }
                     })
      .front();
}

Var row(Var x, std::size_t r) {
  require_rank(x, 2, "row", "input");
  if (r >= x.value().dim(0)) throw DimensionError("row: index out of range");
  const auto src = x.value().row(r);
  Tensor out({src.size()}, std::vector<Real>(src.begin(), src.end()));
  const std::uint32_t xid = x.id;
  const std::size_t width = src.size();
  return x.tape->record(std::move(out), {x}, [xid, r, width](Tape& t, const Ids& outs) {
    const Tensor& g = t.grad(outs[0]);
    Tensor& gx = t.grad_accumulator(xid);
    axpy(1.0, g.data(), gx.data() + r * width, width);
  });
}

Var sum(Var x) {
  Real total = 0.0;
  for (Real v : x.value().values()) total += v;
  const std::uint32_t xid = x.id;
  return x.tape->record(Tensor::scalar(total), {x}, [xid](Tape& t, const Ids& outs) {
    const Real g = t.grad(outs[0])[0];
    for (Real& v : t.grad_accumulator(xid).values()) v += g;
  });
}

Var mean(std::span<const Var> scalars) {
  if (scalars.empty()) throw DimensionError("mean: no inputs");
  for (const Var& s : scalars) {
    if (s.value().size() != 1) throw DimensionError("mean: inputs must be scalars");
  }
  return scale(sum(concat(scalars)), 1.0 / static_cast<Real>(scalars.size()));
}

}  // namespace charembed::ops
