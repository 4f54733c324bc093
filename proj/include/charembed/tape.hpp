#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "charembed/tensor.hpp"

namespace charembed {

class Tape;

// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape lives.
struct Var {
  Tape* tape = nullptr;
  std::uint32_t id = 0;

  const Tensor& value() const;
  const Tensor& grad() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;
};

// Reverse-mode computation record. Nodes are appended in creation order, so
// every operation's inputs precede its outputs, and backward() walks the
// operation list in exact reverse.
//
// An operation is recorded only when at least one input requires a gradient;
// a forward pass over constants leaves the operation list empty.
class Tape {
 public:
  // Receives the tape and the ids of the operation's outputs.
  using BackwardRule = std::function<void(Tape&, const std::vector<std::uint32_t>& outputs)>;

  struct Operation {
    std::vector<std::uint32_t> inputs;
    std::vector<std::uint32_t> outputs;
    BackwardRule backward;
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Detached node: never receives a gradient.
  Var constant(Tensor value);
  // Leaf that accumulates d(loss)/d(value).
  Var variable(Tensor value);

  // Creates the output node of an operation. The node requires a gradient iff
  // any input does; the rule is stored only in that case.
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardRule rule);
  // Multi-output form. Outputs share one Operation entry.
  std::vector<Var> record_multi(std::vector<Tensor> values, std::span<const Var> inputs,
                                BackwardRule rule);
  std::vector<Var> record_multi(std::vector<Tensor> values, std::initializer_list<Var> inputs,
                                BackwardRule rule) {
    return record_multi(std::move(values), std::span<const Var>(inputs.begin(), inputs.size()),
                        std::move(rule));
  }

  const Tensor& value(std::uint32_t id) const { return nodes_[id].value; }
  bool requires_grad(std::uint32_t id) const { return nodes_[id].requires_grad; }

  // Gradient of a node; zero-filled when nothing has flowed into it yet.
  const Tensor& grad(std::uint32_t id);
  // Mutable gradient for accumulation inside backward rules. Only valid for
  // nodes that require a gradient.
  Tensor& grad_accumulator(std::uint32_t id);
  // True once any gradient has flowed into the node.
  bool has_grad(std::uint32_t id) const { return !nodes_[id].grad.empty(); }

  // Seeds d(loss)/d(loss) = 1 and runs every rule in reverse order.
  // Throws ContractError when loss is not a scalar.
  void backward(Var loss);

  std::size_t node_count() const { return nodes_.size(); }
  const std::vector<Operation>& operations() const { return operations_; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
  };

  std::uint32_t push(Tensor value, bool requires_grad);

  std::vector<Node> nodes_;
  std::vector<Operation> operations_;
};

}  // namespace charembed
