#include "stnet/graph.hpp"

#include "stnet/errors.hpp"

namespace stnet {

Var Graph::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Graph::constant(Tensor value) {
  Node n;
  n.owned = std::move(value);
  return push(std::move(n));
}

Var Graph::constant_ref(const Tensor& value) {
  Node n;
  n.external = &value;
  return push(std::move(n));
}

Var Graph::input(Tensor value) {
  Node n;
  n.owned = std::move(value);
  n.requires_grad = true;
  return push(std::move(n));
}

Var Graph::param(ParamStore& store, const std::string& name) {
  const auto key = std::make_pair(static_cast<const ParamStore*>(&store), name);
  if (auto it = param_nodes_.find(key); it != param_nodes_.end()) return it->second;
  Node n;
  n.external = &store.value(name);
  n.requires_grad = true;
  n.store = &store;
  n.param_name = name;
  const Var v = push(std::move(n));
  param_nodes_.emplace(key, v);
  return v;
}

const Tensor& Graph::value(Var v) const {
  const Node& n = nodes_.at(v.id);
  return n.external ? *n.external : n.owned;
}

const Tensor& Graph::grad(Var v) const {
  const Node& n = nodes_.at(v.id);
  if (!n.grad) throw ContractError("node " + std::to_string(v.id) + " has no gradient");
  return *n.grad;
}

Var Graph::emit(Tensor value, std::initializer_list<Var> parents, BackwardFn backward) {
  Node n;
  n.owned = std::move(value);
  for (Var p : parents) {
    if (nodes_.at(p.id).requires_grad) {
      n.requires_grad = true;
      break;
    }
  }
  if (n.requires_grad) n.backward = std::move(backward);
  return push(std::move(n));
}

Tensor& Graph::grad_buffer(Var v) {
  Node& n = nodes_.at(v.id);
  if (!n.grad) n.grad = Tensor(value(v).shape(), 0.0);
  return *n.grad;
}

void Graph::backward(Var loss) {
  if (value(loss).size() != 1) {
    throw ContractError("backward: loss must be scalar, got shape " +
                        shape_string(value(loss).shape()));
  }
  for (Node& n : nodes_) n.grad.reset();
  grad_buffer(loss)[0] = 1.0;

  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.grad || !n.requires_grad || !n.backward) continue;
    n.backward(*this, Var{static_cast<std::uint32_t>(i)});
  }

  for (Node& n : nodes_) {
    if (!n.store) continue;
    Tensor& dst = n.store->grad(n.param_name);
    if (!n.grad) continue;
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += (*n.grad)[k];
  }
}

}  // namespace stnet
