#include "charembed/tape.hpp"

#include <algorithm>

#include "charembed/errors.hpp"

namespace charembed {

const Tensor& Var::value() const { return tape->value(id); }
const Tensor& Var::grad() const { return tape->grad(id); }
bool Var::requires_grad() const { return tape->requires_grad(id); }

std::uint32_t Tape::push(Tensor value, bool requires_grad) {
  nodes_.push_back(Node{std::move(value), Tensor(), requires_grad});
  return static_cast<std::uint32_t>(nodes_.size() - 1);
}

Var Tape::constant(Tensor value) { return Var{this, push(std::move(value), false)}; }

Var Tape::variable(Tensor value) { return Var{this, push(std::move(value), true)}; }

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, BackwardRule rule) {
  std::vector<Tensor> values;
  values.push_back(std::move(value));
  return record_multi(std::move(values), inputs, std::move(rule)).front();
}

std::vector<Var> Tape::record_multi(std::vector<Tensor> values, std::span<const Var> inputs,
                                    BackwardRule rule) {
  bool needs = false;
  for (const Var& in : inputs) {
    if (in.tape != this) throw ContractError("operation mixes nodes from different tapes");
    needs = needs || nodes_[in.id].requires_grad;
  }
  std::vector<Var> out;
  out.reserve(values.size());
  for (Tensor& v : values) out.push_back(Var{this, push(std::move(v), needs)});
  if (needs) {
    Operation op;
    for (const Var& in : inputs) op.inputs.push_back(in.id);
    for (const Var& o : out) op.outputs.push_back(o.id);
    op.backward = std::move(rule);
    operations_.push_back(std::move(op));
  }
  return out;
}

const Tensor& Tape::grad(std::uint32_t id) {
  Node& node = nodes_[id];
  if (node.grad.empty()) node.grad = Tensor(node.value.shape());
  return node.grad;
}

Tensor& Tape::grad_accumulator(std::uint32_t id) {
  Node& node = nodes_[id];
  if (!node.requires_grad) throw ContractError("gradient requested for a detached node");
  if (node.grad.empty()) node.grad = Tensor(node.value.shape());
  return node.grad;
}

void Tape::backward(Var loss) {
  if (loss.tape != this) throw ContractError("loss belongs to another tape");
  if (nodes_[loss.id].value.size() != 1) {
    throw ContractError("backward requires a scalar loss, got shape " +
                        shape_string(nodes_[loss.id].value.shape()));
  }
  if (!nodes_[loss.id].requires_grad) return;
  grad_accumulator(loss.id)[0] += 1.0;
  for (auto it = operations_.rbegin(); it != operations_.rend(); ++it) {
    const bool any_grad = std::any_of(it->outputs.begin(), it->outputs.end(),
                                      [this](std::uint32_t o) { return has_grad(o); });
    if (any_grad) it->backward(*this, it->outputs);
  }
}

}  // namespace charembed
