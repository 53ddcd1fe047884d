#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "stnet/bezier.hpp"
#include "stnet/metrics.hpp"
#include "stnet/training.hpp"

namespace stnet::harness {

struct Evaluation {
  metrics::MetricsTable overall;
  std::vector<metrics::LoadRow> per_load;  // in dataset trial order, only loads present in refs
};

Evaluation evaluate_predictions(const data::Dataset& ds, const std::vector<data::SampleRef>& refs,
                                const std::vector<PointCloud>& predicted);
/// Eval-mode forward over `refs`; leaves the model untouched. ContractError on an empty split.
Evaluation evaluate(training::Model& model, const data::Dataset& ds, const std::vector<data::SampleRef>& refs,
                    const training::FeatureCache* cache = nullptr);

/// Mean ground truth over `refs`: the constant-predictor baseline.
PointCloud mean_points(const data::Dataset& ds, const std::vector<data::SampleRef>& refs);

/// "train" | "test" | "all".
std::vector<data::SampleRef> select_split(const data::Dataset& ds, const std::string& name,
                                          std::optional<sim::LoadCondition> trial = std::nullopt);

struct VariantRun {
  net::Variant variant;
  training::TrainResult run;
  Evaluation test;
};

/// Variants in table order: tfe_only, sfe_only, ff_noattn, full.
inline constexpr std::array<net::Variant, 4> kAblationOrder{net::Variant::TfeOnly, net::Variant::SfeOnly,
                                                            net::Variant::FfNoAttn, net::Variant::Full};

/// Trains and evaluates all four variants with the same seed, split and encoder.
std::vector<VariantRun> ablate(const data::Dataset& ds, const ParamStore& encoder, const training::TrainConfig& base,
                               std::ostream* progress = nullptr);

std::vector<std::pair<std::string, metrics::MetricsTable>> table1_columns(const std::vector<VariantRun>& runs);
std::vector<std::pair<std::string, std::vector<metrics::LoadRow>>> table2_columns(
    const std::vector<VariantRun>& runs);

struct Reconstruction {
  PointCloud predicted;
  PointCloud truth;
  PointCloud backbone;  // dense ground truth, 100 samples
  bezier::BezierCurve curve;
  bezier::BezierCurve oracle_curve;
  bezier::CurveError error;
  bezier::CurveError oracle_error;
  /// sqrt(mean_i ‖p̂_i − p_i‖²).
  double point_rmse = 0.0;
};

inline constexpr std::size_t kDenseBackbone = 100;

/// Base-anchored Bézier fit of a point set against the sample's dense backbone.
bezier::BezierCurve fit_points(const PointCloud& points);
Reconstruction reconstruct_points(const data::Dataset& ds, data::SampleRef ref, const PointCloud& predicted);
Reconstruction reconstruct(training::Model& model, const data::Dataset& ds, data::SampleRef ref);

std::string reconstruction_text(const Reconstruction& r);
std::string reconstruction_csv(const Reconstruction& r);

}  // namespace stnet::harness
