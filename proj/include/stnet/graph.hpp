#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stnet/params.hpp"
#include "stnet/tensor.hpp"

namespace stnet {

/// Handle to a node of a Graph.
struct Var {
  std::uint32_t id = 0;
};

/// Reverse-mode tape. Nodes are appended in evaluation order; backward walks
/// them in reverse. One graph per forward pass, confined to one thread.
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, Var self)>;

  Var constant(Tensor value);
  /// Constant that aliases `value`; the tensor must outlive the graph.
  Var constant_ref(const Tensor& value);
  /// Differentiable leaf not tied to a ParamStore (gradient readable via grad()).
  Var input(Tensor value);
  /// Differentiable leaf aliasing a parameter. backward() adds its gradient
  /// into store.grad(name). Repeated calls with the same name return the same node.
  Var param(ParamStore& store, const std::string& name);

  const Tensor& value(Var v) const;
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }
  bool has_grad(Var v) const { return nodes_.at(v.id).grad.has_value(); }
  /// Gradient of the last backward() loss w.r.t. v. Throws if v received none.
  const Tensor& grad(Var v) const;

  /// For op implementations: append a node computed from `parents`.
  Var emit(Tensor value, std::initializer_list<Var> parents, BackwardFn backward);
  /// For op implementations: gradient accumulator of v, zero-allocated on demand.
  Tensor& grad_buffer(Var v);

  /// Populates gradients from a scalar (single-element) loss node.
  void backward(Var loss);

  std::size_t node_count() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Tensor owned;
    const Tensor* external = nullptr;
    std::optional<Tensor> grad;
    bool requires_grad = false;
    BackwardFn backward;
    ParamStore* store = nullptr;
    std::string param_name;
  };

  Var push(Node node);

  std::vector<Node> nodes_;
  std::map<std::pair<const ParamStore*, std::string>, Var> param_nodes_;
};

}  // namespace stnet
