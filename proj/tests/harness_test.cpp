#include <gtest/gtest.h>

#include <filesystem>

#include "stnet/errors.hpp"
#include "stnet/harness.hpp"

using namespace stnet;
using namespace stnet::harness;
namespace fs = std::filesystem;

namespace {

const data::Dataset& tiny() {
  static const data::Dataset ds = [] {
    const fs::path d = fs::temp_directory_path() / "stnet_harness_tiny";
    fs::remove_all(d);
    data::generate(data::default_generation("tiny", 5), d);
    return data::Dataset::open(d);
  }();
  return ds;
}

// Five-marker dataset without rendering cost concerns: a single short cycle.
const data::Dataset& desk_short() {
  static const data::Dataset ds = [] {
    const fs::path d = fs::temp_directory_path() / "stnet_harness_desk";
    fs::remove_all(d);
    auto cfg = data::default_generation("desk", 5);
    cfg.cycles = 1;
    cfg.steps_per_cycle = 30;
    data::generate(cfg, d);
    return data::Dataset::open(d);
  }();
  return ds;
}

}  // namespace

TEST(Harness, OracleEvaluationIsZero) {
  const auto refs = select_split(tiny(), "test");
  std::vector<PointCloud> truth;
  for (const auto& r : refs) truth.push_back(tiny().record(r).truth);
  const Evaluation ev = evaluate_predictions(tiny(), refs, truth);
  EXPECT_EQ(ev.overall.overall_rmse, 0.0);
  EXPECT_EQ(ev.per_load.size(), 4u);
  EXPECT_THROW(evaluate_predictions(tiny(), {}, {}), ContractError);
  EXPECT_THROW(select_split(tiny(), "validation"), ConfigError);
}

TEST(Harness, AblationHasFourColumns) {
  ParamStore enc;
  net::init_encoder(enc, net::tiny_profile(), 1);
  training::TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch = 16;
  const auto runs = ablate(tiny(), enc, cfg);
  ASSERT_EQ(runs.size(), 4u);
  EXPECT_EQ(table1_columns(runs).size(), 4u);
  EXPECT_EQ(table1_columns(runs).back().first, "full");
  EXPECT_EQ(table2_columns(runs).front().second.size(), 4u);
}

TEST(Harness, EvaluateLeavesModelUntouched) {
  training::TrainConfig cfg;
  cfg.variant = net::Variant::TfeOnly;
  cfg.epochs = 1;
  training::TrainResult r = training::train(tiny(), cfg, nullptr);
  const Checkpoint before = training::to_checkpoint(r.model);
  evaluate(r.model, tiny(), r.split.test);
  const Checkpoint after = training::to_checkpoint(r.model);
  ASSERT_EQ(before.tensors.size(), after.tensors.size());
  for (std::size_t i = 0; i < before.tensors.size(); ++i) EXPECT_EQ(before.tensors[i], after.tensors[i]);
}

TEST(Harness, StraightOracleReconstructionIsExact) {
  const auto& ds = desk_short();
  // Find a sample whose unloaded shape is straight: build one directly instead.
  const auto cfg = ds.config();
  const PointCloud straight = sim::marker_positions({0, 0, 0, 0}, {}, cfg.robot);
  const bezier::BezierCurve c = fit_points(straight);
  EXPECT_EQ(c.control[0], (Vec3{0, 0, 0}));
  const auto dense = sim::backbone_samples({0, 0, 0, 0}, {}, cfg.robot, kDenseBackbone);
  EXPECT_LT(bezier::curve_error(c, dense).mean, 1e-6);
}

TEST(Harness, OracleReconstructionOfDatasetSample) {
  const auto& ds = desk_short();
  const data::SampleRef ref{0, 12};
  const Reconstruction r = reconstruct_points(ds, ref, ds.record(ref).truth);
  EXPECT_EQ(r.curve.control[0], (Vec3{0, 0, 0}));
  EXPECT_EQ(r.point_rmse, 0.0);
  EXPECT_EQ(r.error.mean, r.oracle_error.mean);
  EXPECT_LT(r.oracle_error.mean, 0.5);
  EXPECT_EQ(r.backbone.size(), kDenseBackbone);
  EXPECT_NE(reconstruction_csv(r).find("predicted,0,0,0,"), std::string::npos);
}
