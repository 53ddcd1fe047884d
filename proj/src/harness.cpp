#include "stnet/harness.hpp"

#include <cmath>
#include <sstream>

#include "stnet/errors.hpp"
#include "stnet/format.hpp"

namespace stnet::harness {

using data::SampleRef;

Evaluation evaluate_predictions(const data::Dataset& ds, const std::vector<SampleRef>& refs,
                                const std::vector<PointCloud>& predicted) {
  if (refs.empty()) throw ContractError("evaluate: empty split");
  if (refs.size() != predicted.size()) throw DimensionError("evaluate: prediction count mismatch");
  std::vector<PointCloud> truth;
  truth.reserve(refs.size());
  for (const SampleRef& r : refs) truth.push_back(ds.record(r).truth);
  Evaluation ev;
  ev.overall = metrics::compute(predicted, truth);
  for (std::size_t t = 0; t < ds.trials().size(); ++t) {
    std::vector<PointCloud> p;
    std::vector<PointCloud> g;
    for (std::size_t k = 0; k < refs.size(); ++k) {
      if (refs[k].trial != t) continue;
      p.push_back(predicted[k]);
      g.push_back(truth[k]);
    }
    if (!p.empty()) ev.per_load.push_back({ds.trials()[t].load, metrics::compute(p, g)});
  }
  return ev;
}

Evaluation evaluate(training::Model& model, const data::Dataset& ds, const std::vector<SampleRef>& refs,
                    const training::FeatureCache* cache) {
  if (refs.empty()) throw ContractError("evaluate: empty split");
  return evaluate_predictions(ds, refs, training::predict_all(model, ds, refs, cache));
}

PointCloud mean_points(const data::Dataset& ds, const std::vector<SampleRef>& refs) {
  if (refs.empty()) throw ContractError("mean_points: empty split");
  PointCloud mean(ds.config().robot.markers(), Vec3{0.0, 0.0, 0.0});
  for (const SampleRef& r : refs) {
    const PointCloud& p = ds.record(r).truth;
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] = mean[i] + p[i];
  }
  for (Vec3& m : mean) m = (1.0 / static_cast<double>(refs.size())) * m;
  return mean;
}

std::vector<SampleRef> select_split(const data::Dataset& ds, const std::string& name,
                                    std::optional<sim::LoadCondition> trial) {
  const data::Split s = training::dataset_split(ds, trial);
  if (name == "train") return s.train;
  if (name == "test") return s.test;
  if (name == "all") {
    std::vector<SampleRef> all = s.train;
    all.insert(all.end(), s.test.begin(), s.test.end());
    std::sort(all.begin(), all.end());
    return all;
  }
  throw ConfigError("unknown split '" + name + "' (expected train, test or all)");
}

std::vector<VariantRun> ablate(const data::Dataset& ds, const ParamStore& encoder, const training::TrainConfig& base,
                               std::ostream* progress) {
  const net::NetConfig cfg = net::profile_by_name(ds.config().profile);
  const data::Split split = training::dataset_split(ds, base.trial);
  std::vector<SampleRef> used = split.train;
  used.insert(used.end(), split.test.begin(), split.test.end());
  ParamStore enc = encoder;
  const training::FeatureCache cache(ds, cfg, enc, used);

  std::vector<VariantRun> runs;
  for (net::Variant v : kAblationOrder) {
    training::TrainConfig tc = base;
    tc.variant = v;
    VariantRun run{v, training::train(ds, tc, &encoder, &cache, progress), {}};
    run.test = evaluate(run.run.model, ds, run.run.split.test, &cache);
    runs.push_back(std::move(run));
  }
  return runs;
}

std::vector<std::pair<std::string, metrics::MetricsTable>> table1_columns(const std::vector<VariantRun>& runs) {
  std::vector<std::pair<std::string, metrics::MetricsTable>> cols;
  for (const auto& r : runs) cols.emplace_back(net::to_string(r.variant), r.test.overall);
  return cols;
}

std::vector<std::pair<std::string, std::vector<metrics::LoadRow>>> table2_columns(
    const std::vector<VariantRun>& runs) {
  std::vector<std::pair<std::string, std::vector<metrics::LoadRow>>> cols;
  for (const auto& r : runs) cols.emplace_back(net::to_string(r.variant), r.test.per_load);
  return cols;
}

bezier::BezierCurve fit_points(const PointCloud& points) {
  const Vec3 base{0.0, 0.0, 0.0};
  const std::vector<double> t = bezier::chord_params(points, base);
  return bezier::fit(points, t, base);
}

Reconstruction reconstruct_points(const data::Dataset& ds, SampleRef ref, const PointCloud& predicted) {
  const data::Record& rec = ds.record(ref);
  const auto& cfg = ds.config();
  const std::size_t last = rec.window.dim(0) - 1;
  sim::TendonDisplacement q{};
  for (std::size_t a = 0; a < 4; ++a) q[a] = rec.window[last * 4 + a];

  Reconstruction r;
  r.predicted = predicted;
  r.truth = rec.truth;
  r.backbone = sim::backbone_samples(q, sim::load_for(rec.load, cfg.load_magnitude), cfg.robot, kDenseBackbone);
  r.curve = fit_points(predicted);
  r.oracle_curve = fit_points(rec.truth);
  r.error = bezier::curve_error(r.curve, r.backbone);
  r.oracle_error = bezier::curve_error(r.oracle_curve, r.backbone);
  double sq = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const Vec3 d = predicted[i] - rec.truth[i];
    sq += dot(d, d);
  }
  r.point_rmse = std::sqrt(sq / static_cast<double>(predicted.size()));
  return r;
}

Reconstruction reconstruct(training::Model& model, const data::Dataset& ds, SampleRef ref) {
  const std::vector<PointCloud> pred = training::predict_all(model, ds, {ref});
  return reconstruct_points(ds, ref, pred.front());
}

std::string reconstruction_text(const Reconstruction& r) {
  std::ostringstream out;
  out << "control points (predicted | oracle)\n";
  for (std::size_t i = 0; i < r.curve.control.size(); ++i) {
    out << "  p" << i << "  ";
    for (double v : r.curve.control[i]) out << metrics::fixed(v, 3) << ' ';
    out << "|  ";
    for (double v : r.oracle_curve.control[i]) out << metrics::fixed(v, 3) << ' ';
    out << '\n';
  }
  out << "point rmse          " << metrics::fixed(r.point_rmse) << '\n';
  out << "curve error mean    " << metrics::fixed(r.error.mean) << "  max " << metrics::fixed(r.error.max) << '\n';
  out << "oracle error mean   " << metrics::fixed(r.oracle_error.mean) << "  max "
      << metrics::fixed(r.oracle_error.max) << '\n';
  return out.str();
}

std::string reconstruction_csv(const Reconstruction& r) {
  std::ostringstream out;
  out << "curve,p0x,p0y,p0z,p1x,p1y,p1z,p2x,p2y,p2z,p3x,p3y,p3z,p4x,p4y,p4z,error_mean,error_max,point_rmse\n";
  out << "predicted," << bezier::to_csv_row(r.curve) << ',' << format_real(r.error.mean) << ','
      << format_real(r.error.max) << ',' << format_real(r.point_rmse) << '\n';
  out << "oracle," << bezier::to_csv_row(r.oracle_curve) << ',' << format_real(r.oracle_error.mean) << ','
      << format_real(r.oracle_error.max) << ",0\n";
  return out.str();
}

}  // namespace stnet::harness
