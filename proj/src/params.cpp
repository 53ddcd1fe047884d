#include "stnet/params.hpp"

#include <cmath>

#include "stnet/errors.hpp"

namespace stnet {

void ParamStore::add(const std::string& name, Tensor value) {
  if (entries_.count(name)) throw ContractError("duplicate parameter name '" + name + "'");
  entries_.emplace(name, Entry{std::move(value), std::nullopt});
  order_.push_back(name);
}

ParamStore::Entry& ParamStore::entry(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ContractError("unknown parameter '" + name + "'");
  return it->second;
}

const ParamStore::Entry& ParamStore::entry(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ContractError("unknown parameter '" + name + "'");
  return it->second;
}

Tensor& ParamStore::value(const std::string& name) { return entry(name).value; }
const Tensor& ParamStore::value(const std::string& name) const { return entry(name).value; }

Tensor& ParamStore::grad(const std::string& name) {
  Entry& e = entry(name);
  if (!e.grad) e.grad = Tensor(e.value.shape(), 0.0);
  return *e.grad;
}

bool ParamStore::has_grad(const std::string& name) const { return entry(name).grad.has_value(); }

const Tensor& ParamStore::grad_or_throw(const std::string& name) const {
  const Entry& e = entry(name);
  if (!e.grad) throw ContractError("parameter '" + name + "' has no gradient");
  return *e.grad;
}

void ParamStore::zero_grad() {
  for (auto& [name, e] : entries_) {
    if (e.grad) {
      e.grad->fill(0.0);
    } else {
      e.grad = Tensor(e.value.shape(), 0.0);
    }
  }
}

void ParamStore::clear_grad() {
  for (auto& [name, e] : entries_) e.grad.reset();
}

void ParamStore::scale_grad(double factor) {
  for (auto& [name, e] : entries_) {
    if (!e.grad) continue;
    for (double& g : e.grad->values()) g *= factor;
  }
}

std::size_t ParamStore::parameter_count() const {
  std::size_t total = 0;
  for (const auto& [name, e] : entries_) total += e.value.size();
  return total;
}

void adam_step(ParamStore& params, AdamState& state, double lr, const AdamHyper& hyper) {
  for (const auto& name : params.names()) {
    if (!params.has_grad(name)) {
      throw ContractError("adam_step: missing gradient for parameter '" + name + "'");
    }
  }
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(hyper.beta1, t);
  const double correction2 = 1.0 - std::pow(hyper.beta2, t);

  for (const auto& name : params.names()) {
    Tensor& value = params.value(name);
    const Tensor& grad = params.grad_or_throw(name);
    auto [m_it, m_new] = state.first_moment.try_emplace(name, value.shape(), 0.0);
    auto [v_it, v_new] = state.second_moment.try_emplace(name, value.shape(), 0.0);
    Tensor& m = m_it->second;
    Tensor& v = v_it->second;
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = grad[i];
      m[i] = hyper.beta1 * m[i] + (1.0 - hyper.beta1) * g;
      v[i] = hyper.beta2 * v[i] + (1.0 - hyper.beta2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      value[i] -= lr * m_hat / (std::sqrt(v_hat) + hyper.epsilon);
    }
  }
}

}  // namespace stnet
