#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "stnet/checkpoint.hpp"
#include "stnet/errors.hpp"
#include "support/gradcheck.hpp"

using namespace stnet;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("stnet_ckpt_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Checkpoint, RoundTripIsBitExact) {
  Checkpoint c;
  c.put("a", testkit::random_tensor({3, 4}, 1));
  c.put("b.c", Tensor::scalar(1.0 / 3.0));
  c.meta["note"] = "x";
  const fs::path dir = scratch("roundtrip");
  save_checkpoint(dir, c);
  const Checkpoint r = load_checkpoint(dir);
  ASSERT_EQ(r.tensors.size(), 2u);
  EXPECT_EQ(r.at("a"), c.at("a"));
  EXPECT_EQ(r.at("b.c"), c.at("b.c"));
  EXPECT_EQ(r.meta.at("note"), "x");
}

TEST(Checkpoint, TruncatedBlobIsParseError) {
  Checkpoint c;
  c.put("a", Tensor({16}, 2.0));
  const fs::path dir = scratch("truncated");
  save_checkpoint(dir, c);
  fs::resize_file(dir / "tensors.bin", 40);
  EXPECT_THROW(load_checkpoint(dir), ParseError);
}

TEST(Checkpoint, MalformedManifestIsParseError) {
  const fs::path dir = scratch("malformed");
  fs::create_directories(dir);
  std::ofstream(dir / "manifest.json") << "{ not json";
  std::ofstream(dir / "tensors.bin") << "";
  EXPECT_THROW(load_checkpoint(dir), ParseError);
}

TEST(Checkpoint, ImportChecksShapes) {
  ParamStore src;
  src.add("w", Tensor({2, 2}, 1.0));
  Checkpoint c;
  export_params(src, c, "net.");
  ParamStore dst;
  dst.add("w", Tensor({2, 2}));
  dst.add("other", Tensor({1}));
  EXPECT_EQ(import_params(dst, c, "net."), 1u);
  EXPECT_EQ(dst.value("w"), src.value("w"));
  ParamStore wrong;
  wrong.add("w", Tensor({4}));
  EXPECT_THROW(import_params(wrong, c, "net."), DimensionError);
}
