#pragma once

// Central finite-difference checks against the reverse-mode tape.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "stnet/graph.hpp"
#include "stnet/params.hpp"
#include "stnet/rng.hpp"

namespace stnet::testkit {

struct GradCheck {
  double max_rel = 0.0;
  double max_abs = 0.0;
  std::string worst;
  std::size_t checked = 0;
};

// |a - n| / max(|a|, |n|, floor). The floor keeps exact zeros (dead ReLUs,
// unused pooling inputs) from dividing by rounding noise.
inline double relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

inline Tensor random_tensor(Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  Rng rng(seed);
  for (double& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

using InputLoss = std::function<Var(Graph&, const std::vector<Var>&)>;

// Gradients of a scalar loss with respect to free input tensors.
inline GradCheck check_inputs(std::vector<Tensor> inputs, const InputLoss& loss, double eps = 1e-4,
                              double floor = 1e-6) {
  std::vector<Tensor> analytic;
  {
    Graph g;
    std::vector<Var> vars;
    for (const Tensor& t : inputs) vars.push_back(g.input(t));
    g.backward(loss(g, vars));
    for (Var v : vars) analytic.push_back(g.has_grad(v) ? g.grad(v) : Tensor(g.value(v).shape()));
  }
  auto evaluate = [&]() {
    Graph g;
    std::vector<Var> vars;
    for (const Tensor& t : inputs) vars.push_back(g.constant(t));
    return g.value(loss(g, vars))[0];
  };
  GradCheck out;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    for (std::size_t k = 0; k < inputs[i].size(); ++k) {
      const double saved = inputs[i][k];
      inputs[i][k] = saved + eps;
      const double up = evaluate();
      inputs[i][k] = saved - eps;
      const double down = evaluate();
      inputs[i][k] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double rel = relative_error(analytic[i][k], numeric, floor);
      out.max_abs = std::max(out.max_abs, std::abs(analytic[i][k] - numeric));
      if (rel > out.max_rel) {
        out.max_rel = rel;
        out.worst = "input " + std::to_string(i) + "[" + std::to_string(k) + "]";
      }
      ++out.checked;
    }
  }
  return out;
}

using ParamLoss = std::function<Var(Graph&, ParamStore&)>;

// Gradients with respect to every parameter in `store`. `stride` > 1 samples a
// subset of entries of large tensors.
inline GradCheck check_params(ParamStore& store, const ParamLoss& loss, double eps = 1e-4,
                              double floor = 1e-6, std::size_t stride = 1) {
  store.zero_grad();
  {
    Graph g;
    g.backward(loss(g, store));
  }
  std::vector<std::pair<std::string, Tensor>> analytic;
  for (const auto& name : store.names()) analytic.emplace_back(name, store.grad(name));
  store.clear_grad();

  auto evaluate = [&]() {
    Graph g;
    return g.value(loss(g, store))[0];
  };
  GradCheck out;
  for (const auto& [name, grad] : analytic) {
    Tensor& value = store.value(name);
    for (std::size_t k = 0; k < value.size(); k += stride) {
      const double saved = value[k];
      value[k] = saved + eps;
      const double up = evaluate();
      value[k] = saved - eps;
      const double down = evaluate();
      value[k] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double rel = relative_error(grad[k], numeric, floor);
      out.max_abs = std::max(out.max_abs, std::abs(grad[k] - numeric));
      if (rel > out.max_rel) {
        out.max_rel = rel;
        out.worst = name + "[" + std::to_string(k) + "]";
      }
      ++out.checked;
    }
  }
  return out;
}

}  // namespace stnet::testkit
