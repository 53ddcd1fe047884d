#include "stnet/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "stnet/errors.hpp"

namespace stnet {

namespace fs = std::filesystem;

namespace {

constexpr const char* kManifest = "manifest.json";
constexpr const char* kBlob = "tensors.bin";

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xFFu) << (8 * (7 - i));
    return r;
  }
}

}  // namespace

bool Checkpoint::contains(const std::string& name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return true;
  }
  return false;
}

const Tensor& Checkpoint::at(const std::string& name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return t;
  }
  throw ContractError("checkpoint has no tensor named '" + name + "'");
}

void Checkpoint::put(const std::string& name, Tensor value) {
  for (auto& [n, t] : tensors) {
    if (n == name) {
      t = std::move(value);
      return;
    }
  }
  tensors.emplace_back(name, std::move(value));
}

void save_checkpoint(const fs::path& dir, const Checkpoint& ckpt) {
  fs::create_directories(dir);
  nlohmann::json manifest;
  manifest["format"] = "stnet-checkpoint";
  manifest["version"] = 1;
  manifest["dtype"] = "float64";
  manifest["byte_order"] = "little";
  manifest["blob"] = kBlob;
  manifest["meta"] = ckpt.meta;
  manifest["tensors"] = nlohmann::json::array();

  std::ofstream blob(dir / kBlob, std::ios::binary | std::ios::trunc);
  if (!blob) throw std::runtime_error("cannot write " + (dir / kBlob).string());
  std::uint64_t offset = 0;
  for (const auto& [name, t] : ckpt.tensors) {
    manifest["tensors"].push_back({{"name", name}, {"shape", t.shape()}, {"offset", offset}});
    for (double v : t.values()) {
      const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(v));
      blob.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
    offset += t.size() * sizeof(double);
  }
  if (!blob) throw std::runtime_error("short write to " + (dir / kBlob).string());

  std::ofstream out(dir / kManifest, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + (dir / kManifest).string());
  out << manifest.dump(2) << '\n';
}

Checkpoint load_checkpoint(const fs::path& dir) {
  std::ifstream in(dir / kManifest);
  if (!in) throw std::runtime_error("cannot open checkpoint manifest " + (dir / kManifest).string());
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("checkpoint manifest: " + std::string(e.what()));
  }
  if (manifest.value("format", "") != "stnet-checkpoint") {
    throw ParseError("checkpoint manifest: unexpected format tag");
  }

  const fs::path blob_path = dir / manifest.value("blob", std::string(kBlob));
  std::ifstream blob(blob_path, std::ios::binary);
  if (!blob) throw std::runtime_error("cannot open checkpoint blob " + blob_path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(blob)), std::istreambuf_iterator<char>());

  Checkpoint ckpt;
  ckpt.meta = manifest.value("meta", nlohmann::json::object());
  for (const auto& entry : manifest.at("tensors")) {
    const auto name = entry.at("name").get<std::string>();
    const auto shape = entry.at("shape").get<Shape>();
    const auto offset = entry.at("offset").get<std::uint64_t>();
    const std::size_t count = shape_product(shape);
    if (offset + count * sizeof(double) > bytes.size()) {
      throw ParseError("checkpoint blob truncated at tensor '" + name + "'");
    }
    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i) {
      std::uint64_t bits;
      std::memcpy(&bits, bytes.data() + offset + i * sizeof bits, sizeof bits);
      values[i] = std::bit_cast<double>(to_little_endian(bits));
    }
    ckpt.tensors.emplace_back(name, Tensor(shape, std::move(values)));
  }
  return ckpt;
}

void export_params(const ParamStore& store, Checkpoint& ckpt, const std::string& prefix) {
  for (const auto& name : store.names()) ckpt.put(prefix + name, store.value(name));
}

std::size_t import_params(ParamStore& store, const Checkpoint& ckpt, const std::string& prefix) {
  std::size_t loaded = 0;
  for (const auto& name : store.names()) {
    if (!ckpt.contains(prefix + name)) continue;
    const Tensor& src = ckpt.at(prefix + name);
    Tensor& dst = store.value(name);
    if (src.shape() != dst.shape()) {
      throw DimensionError("checkpoint tensor '" + prefix + name + "' has shape " +
                           shape_string(src.shape()) + ", parameter expects " +
                           shape_string(dst.shape()));
    }
    dst = src;
    ++loaded;
  }
  return loaded;
}

}  // namespace stnet
