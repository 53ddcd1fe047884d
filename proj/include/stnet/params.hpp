#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stnet/tensor.hpp"

namespace stnet {

/// Named trainable tensors with one gradient slot each. Names keep insertion order.
class ParamStore {
 public:
  void add(const std::string& name, Tensor value);

  bool contains(const std::string& name) const { return entries_.count(name) != 0; }
  Tensor& value(const std::string& name);
  const Tensor& value(const std::string& name) const;

  /// Gradient slot; allocated with zeros on first access.
  Tensor& grad(const std::string& name);
  bool has_grad(const std::string& name) const;
  const Tensor& grad_or_throw(const std::string& name) const;

  /// Allocates zero gradients for every parameter.
  void zero_grad();
  /// Drops gradient slots so a later optimizer step can detect missing gradients.
  void clear_grad();
  void scale_grad(double factor);

  const std::vector<std::string>& names() const noexcept { return order_; }
  std::size_t size() const noexcept { return order_.size(); }
  std::size_t parameter_count() const;

 private:
  struct Entry {
    Tensor value;
    std::optional<Tensor> grad;
  };
  Entry& entry(const std::string& name);
  const Entry& entry(const std::string& name) const;

  std::map<std::string, Entry> entries_;
  std::vector<std::string> order_;
};

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::map<std::string, Tensor> first_moment;
  std::map<std::string, Tensor> second_moment;
  std::uint64_t step = 0;
};

/// One bias-corrected Adam update over every parameter in `params`.
/// Throws ContractError if any parameter has no gradient slot.
void adam_step(ParamStore& params, AdamState& state, double lr, const AdamHyper& hyper = {});

}  // namespace stnet
