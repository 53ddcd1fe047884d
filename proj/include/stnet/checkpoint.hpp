#pragma once

// Parameter checkpoint: <dir>/manifest.json lists (name, shape, byte offset) for every
// tensor in <dir>/tensors.bin, a raw little-endian float64 blob. Free-form metadata
// (configs, normalisation constants) lives under the manifest's "meta" key.

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "stnet/params.hpp"
#include "stnet/tensor.hpp"

namespace stnet {

struct Checkpoint {
  std::vector<std::pair<std::string, Tensor>> tensors;
  nlohmann::json meta = nlohmann::json::object();

  bool contains(const std::string& name) const;
  const Tensor& at(const std::string& name) const;
  void put(const std::string& name, Tensor value);
};

void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& dir);

/// Copies every parameter of `store` (with an optional name prefix) into `ckpt`.
void export_params(const ParamStore& store, Checkpoint& ckpt, const std::string& prefix = "");
/// Overwrites the values of every parameter in `store` whose name (with `prefix`)
/// is in `ckpt`. Throws DimensionError on shape mismatch; returns the number loaded.
std::size_t import_params(ParamStore& store, const Checkpoint& ckpt, const std::string& prefix = "");

}  // namespace stnet
