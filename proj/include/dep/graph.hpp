#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "dep/tensor.hpp"

namespace dep {

class Graph;
using NodeId = std::int32_t;

// Handle to a node in a Graph; cheap to copy.
struct Var {
  Graph* graph = nullptr;
  NodeId id = -1;
  const Tensor& value() const;
  const Tensor& grad() const;
};

enum class Mode { Train, Eval };

// Dynamic tape. Nodes are appended in evaluation order, which is a
// topological order by construction; backward() walks the tape in reverse
// and visits every node exactly once.
class Graph {
 public:
  struct Node {
    const char* op = "";
    std::vector<NodeId> inputs;
    Tensor value;
    Tensor grad;  // allocated by backward(); empty before
    bool requires_grad = false;
    std::function<void(Graph&, Node&)> backward;
  };

  Var leaf(Tensor value, bool requires_grad = false) {
    Node n;
    n.op = "leaf";
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    nodes_.push_back(std::move(n));
    return Var{this, static_cast<NodeId>(nodes_.size() - 1)};
  }

  Var make(const char* op, std::vector<NodeId> inputs, Tensor value,
           std::function<void(Graph&, Node&)> backward) {
    Node n;
    n.op = op;
    n.requires_grad = false;
    for (NodeId i : inputs) n.requires_grad = n.requires_grad || node(i).requires_grad;
    n.inputs = std::move(inputs);
    n.value = std::move(value);
    if (n.requires_grad) n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return Var{this, static_cast<NodeId>(nodes_.size() - 1)};
  }

  Node& node(NodeId id) { return nodes_[static_cast<std::size_t>(id)]; }
  const Node& node(NodeId id) const { return nodes_[static_cast<std::size_t>(id)]; }

  const Tensor& value(NodeId id) const { return node(id).value; }

  const Tensor& grad(NodeId id) const {
    const Node& n = node(id);
    if (n.grad.size() == 0) throw ContractError("graph: no gradient available for this node; run backward first");
    return n.grad;
  }

  bool wants_grad(NodeId id) const { return node(id).requires_grad; }

  // Accumulation buffer for a node's gradient (pre-zeroed by backward()).
  Tensor& grad_acc(NodeId id) { return node(id).grad; }

  std::size_t size() const { return nodes_.size(); }

  // Reverse-mode sweep from a scalar root.
  void backward(Var root) {
    Node& r = node(root.id);
    if (r.value.size() != 1)
      throw ContractError("graph: backward root must be a scalar, got shape " + shape_str(r.value.shape()));
    if (!r.requires_grad) return;  // nothing reachable requires gradients
    for (NodeId id = 0; id <= root.id; ++id) {
      Node& n = node(id);
      if (n.requires_grad) n.grad = Tensor::zeros(n.value.shape());
    }
    r.grad[0] = 1.0;
    for (NodeId id = root.id; id >= 0; --id) {
      Node& n = node(id);
      if (n.requires_grad && n.backward) n.backward(*this, n);
    }
  }

 private:
  std::deque<Node> nodes_;  // deque: stable references while appending
};

inline const Tensor& Var::value() const { return graph->value(id); }
inline const Tensor& Var::grad() const { return graph->grad(id); }

// Named, trainable tensor owned by a model. `group` selects the learning
// rate multiplier group (0 = backbone, 1 = newly added layers).
struct Parameter {
  std::string name;
  Tensor value;
  int group = 0;
};

// Registers parameters as graph leaves, once per graph, and remembers the
// mapping so the trainer can read gradients back after backward().
class Binder {
 public:
  explicit Binder(Graph& g) : graph_(&g) {}

  Var operator()(Parameter& p) {
    for (const auto& [q, v] : bound_)
      if (q == &p) return v;
    Var v = graph_->leaf(p.value, true);
    bound_.emplace_back(&p, v);
    return v;
  }

  const std::vector<std::pair<Parameter*, Var>>& bound() const { return bound_; }

 private:
  Graph* graph_;
  std::vector<std::pair<Parameter*, Var>> bound_;
};

}  // namespace dep
