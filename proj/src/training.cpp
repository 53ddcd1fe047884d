#include "stnet/training.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stnet/errors.hpp"
#include "stnet/format.hpp"
#include "stnet/metrics.hpp"
#include "stnet/rng.hpp"

namespace stnet::training {

using data::SampleRef;

namespace {

constexpr std::uint64_t kPretrainOrder = 0x50524554;
constexpr std::uint64_t kTrainOrder = 0x5452414E;
constexpr std::uint64_t kDropout = 0x44524F50;

bool all_finite(double v) { return std::isfinite(v); }

}  // namespace

// ---------------------------------------------------------------------------
// Pretraining

void PretrainConfig::validate() const {
  if (batch < 1) throw ConfigError("pretrain: batch must be >= 1");
  if (!(lr > 0.0)) throw ConfigError("pretrain: learning rate must be positive");
  if (alpha < 0.0 || beta < 0.0) throw ConfigError("pretrain: loss weights must be non-negative");
  if (perceptual_blocks < 1) throw ConfigError("pretrain: perceptual_blocks must be >= 1");
}

double composite_loss_over(const data::Dataset& ds, const net::NetConfig& cfg, ParamStore& autoencoder,
                           const net::PerceptualExtractor& phi, const std::vector<SampleRef>& refs,
                           double alpha, double beta) {
  if (refs.empty()) return 0.0;
  double total = 0.0;
  for (const SampleRef& r : refs) {
    Graph g;
    const Var x = g.constant(ds.image(r));
    const Var y = net::sfe_decode(g, autoencoder, cfg, net::sfe_encode(g, autoencoder, cfg, x));
    total += g.value(net::sfe_composite_loss(g, phi, y, x, alpha, beta).total)[0];
  }
  return total / static_cast<double>(refs.size());
}

PretrainResult pretrain_sfe(const data::Dataset& ds, const PretrainConfig& cfg, std::ostream* progress) {
  cfg.validate();
  PretrainResult result;
  result.cfg = net::profile_by_name(ds.config().profile);
  const net::NetConfig& net_cfg = result.cfg;

  const data::Split split = dataset_split(ds);
  std::vector<SampleRef> pool = split.train;
  Rng rng(mix_seed(cfg.seed, kPretrainOrder));
  rng.shuffle(pool);
  if (cfg.max_images > 0 && pool.size() > cfg.max_images) pool.resize(cfg.max_images);
  std::vector<SampleRef> val = split.test;
  rng.shuffle(val);
  if (val.size() > cfg.validation_images) val.resize(cfg.validation_images);
  result.validation = val;

  result.autoencoder = net::make_autoencoder_params(net_cfg, cfg.seed);
  ParamStore& params = result.autoencoder;
  const net::PerceptualExtractor phi(net_cfg, params, std::min(cfg.perceptual_blocks, net_cfg.blocks()));
  AdamState adam;

  std::vector<Tensor> images;
  images.reserve(pool.size());
  for (const SampleRef& r : pool) images.push_back(ds.image(r));

  std::vector<std::size_t> order(pool.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    PretrainEpoch log;
    log.epoch = epoch;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      const std::size_t end = std::min(order.size(), start + cfg.batch);
      params.zero_grad();
      for (std::size_t i = start; i < end; ++i) {
        Graph g;
        const Var x = g.constant_ref(images[order[i]]);
        const Var y = net::sfe_decode(g, params, net_cfg, net::sfe_encode(g, params, net_cfg, x));
        const net::CompositeTerms t = net::sfe_composite_loss(g, phi, y, x, cfg.alpha, cfg.beta);
        const double loss = g.value(t.total)[0];
        if (!all_finite(loss)) {
          throw DivergenceError("pretrain: non-finite loss in epoch " + std::to_string(epoch));
        }
        log.loss += loss;
        log.mse += g.value(t.mse)[0];
        log.perceptual += g.value(t.perceptual)[0];
        log.ssim += g.value(t.ssim)[0];
        g.backward(t.total);
      }
      params.scale_grad(1.0 / static_cast<double>(end - start));
      adam_step(params, adam, cfg.lr);
    }
    const double n = static_cast<double>(std::max<std::size_t>(order.size(), 1));
    log.loss /= n;
    log.mse /= n;
    log.perceptual /= n;
    log.ssim /= n;
    log.val_loss = composite_loss_over(ds, net_cfg, params, phi, val, cfg.alpha, cfg.beta);
    if (!all_finite(log.val_loss)) {
      throw DivergenceError("pretrain: non-finite validation loss in epoch " + std::to_string(epoch));
    }
    result.log.push_back(log);
    if (progress) {
      *progress << "pretrain epoch " << epoch << "/" << cfg.epochs << " loss " << metrics::fixed(log.loss, 6)
                << " val " << metrics::fixed(log.val_loss, 6) << std::endl;
    }
  }
  return result;
}

std::string pretrain_log_csv(const std::vector<PretrainEpoch>& log) {
  std::ostringstream out;
  out << "epoch,loss,mse,perceptual,ssim_loss,val_loss\n";
  for (const auto& e : log) {
    out << e.epoch << ',' << format_real(e.loss) << ',' << format_real(e.mse) << ',' << format_real(e.perceptual)
        << ',' << format_real(e.ssim) << ',' << format_real(e.val_loss) << '\n';
  }
  return out.str();
}

Checkpoint encoder_checkpoint(const PretrainResult& result, const PretrainConfig& cfg) {
  ParamStore encoder;
  for (const std::string& name : result.autoencoder.names()) {
    if (name.rfind("sfe.", 0) == 0) encoder.add(name, result.autoencoder.value(name));
  }
  Checkpoint ckpt;
  export_params(encoder, ckpt);
  ckpt.meta = {{"kind", "sfe-encoder"},
               {"net", net::to_json(result.cfg)},
               {"epochs", cfg.epochs},
               {"alpha", cfg.alpha},
               {"beta", cfg.beta},
               {"seed", cfg.seed}};
  if (!result.log.empty()) ckpt.meta["final_val_loss"] = result.log.back().val_loss;
  return ckpt;
}

ParamStore load_encoder(const Checkpoint& ckpt, const net::NetConfig& cfg) {
  if (ckpt.meta.value("kind", std::string()) != "sfe-encoder" && !ckpt.contains("sfe.block0.conv0.weight")) {
    throw ConfigError("checkpoint holds no encoder weights");
  }
  if (ckpt.meta.contains("net") && ckpt.meta.at("net").value("profile", std::string()) != cfg.profile) {
    throw ConfigError("encoder checkpoint profile '" + ckpt.meta.at("net").value("profile", std::string()) +
                      "' does not match dataset profile '" + cfg.profile + "'");
  }
  ParamStore encoder;
  net::init_encoder(encoder, cfg, 0);
  const std::size_t loaded = import_params(encoder, ckpt);
  if (loaded != encoder.size()) {
    throw ConfigError("encoder checkpoint has " + std::to_string(loaded) + " of " +
                      std::to_string(encoder.size()) + " encoder tensors");
  }
  return encoder;
}

// ---------------------------------------------------------------------------
// Feature cache and normalisation

FeatureCache::FeatureCache(const data::Dataset& ds, const net::NetConfig& cfg, ParamStore& encoder,
                           const std::vector<SampleRef>& refs) {
  for (const SampleRef& r : refs) {
    if (features_.count(r)) continue;
    Graph g;
    const Var x = g.constant(ds.image(r));
    features_.emplace(r, g.value(net::sfe_encode(g, encoder, cfg, x)));
  }
}

const Tensor& FeatureCache::at(SampleRef s) const {
  const auto it = features_.find(s);
  if (it == features_.end()) {
    throw ContractError("feature cache: no entry for trial " + std::to_string(s.trial) + " sample " +
                        std::to_string(s.index));
  }
  return it->second;
}

Normalizer Normalizer::fit(const data::Dataset& ds, const std::vector<SampleRef>& train) {
  if (train.empty()) throw ContractError("normalizer: empty training split");
  const std::size_t n = ds.config().robot.markers();
  const double count = static_cast<double>(train.size());
  std::vector<double> q_sq(4, 0.0);
  std::vector<double> mean(3 * n, 0.0);
  std::vector<double> sq(3 * n, 0.0);
  for (const SampleRef& r : train) {
    const data::Record& rec = ds.record(r);
    const std::size_t last = rec.window.dim(0) - 1;
    for (std::size_t a = 0; a < 4; ++a) q_sq[a] += rec.window[last * 4 + a] * rec.window[last * 4 + a];
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t a = 0; a < 3; ++a) mean[3 * i + a] += rec.truth[i][a];
    }
  }
  for (double& m : mean) m /= count;
  for (const SampleRef& r : train) {
    const data::Record& rec = ds.record(r);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t a = 0; a < 3; ++a) {
        const double d = rec.truth[i][a] - mean[3 * i + a];
        sq[3 * i + a] += d * d;
      }
    }
  }
  Normalizer norm;
  norm.q_scale = Tensor({4});
  for (std::size_t a = 0; a < 4; ++a) norm.q_scale[a] = 1.0 / std::max(std::sqrt(q_sq[a] / count), 1e-6);
  norm.target_mean = Tensor({n, 3}, mean);
  norm.target_std = Tensor({n, 3});
  for (std::size_t k = 0; k < 3 * n; ++k) norm.target_std[k] = std::max(std::sqrt(sq[k] / count), 1e-6);
  return norm;
}

Tensor Normalizer::window(const Tensor& raw) const {
  Tensor out = raw;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] *= q_scale[k % 4];
  return out;
}

Tensor Normalizer::target(const PointCloud& raw) const {
  Tensor out({raw.size(), 3});
  if (out.size() != target_mean.size()) throw DimensionError("normalizer: marker count mismatch");
  for (std::size_t i = 0; i < raw.size(); ++i) {
    for (std::size_t a = 0; a < 3; ++a) {
      const std::size_t k = 3 * i + a;
      out[k] = (raw[i][a] - target_mean[k]) / target_std[k];
    }
  }
  return out;
}

PointCloud Normalizer::points(const Tensor& normalized) const {
  if (normalized.size() != target_mean.size()) throw DimensionError("normalizer: output size mismatch");
  PointCloud out(normalized.size() / 3);
  for (std::size_t k = 0; k < normalized.size(); ++k) {
    out[k / 3][k % 3] = normalized[k] * target_std[k] + target_mean[k];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model

PointCloud Model::predict(const Tensor& window, const Tensor* features) {
  Graph g;
  std::optional<Var> spatial;
  if (net::uses_images(variant)) {
    if (!features) throw ContractError("predict: variant " + net::to_string(variant) + " needs image features");
    spatial = g.constant_ref(*features);
  }
  const Var out = net::st_forward_features(g, head, cfg, variant, norm.window(window), spatial);
  return norm.points(g.value(out));
}

Tensor Model::encode(const Tensor& image) {
  Graph g;
  return g.value(net::sfe_encode(g, encoder, cfg, g.constant_ref(image)));
}

Checkpoint to_checkpoint(const Model& model) {
  Checkpoint ckpt;
  export_params(model.encoder, ckpt);
  export_params(model.head, ckpt);
  ckpt.put("norm.q_scale", model.norm.q_scale);
  ckpt.put("norm.target_mean", model.norm.target_mean);
  ckpt.put("norm.target_std", model.norm.target_std);
  ckpt.meta = {{"kind", "stnet-model"}, {"variant", net::to_string(model.variant)}, {"net", net::to_json(model.cfg)}};
  return ckpt;
}

namespace {

ParamStore head_params(const net::NetConfig& cfg, net::Variant v, std::uint64_t seed) {
  ParamStore head;
  if (net::uses_tendons(v)) net::init_tfe(head, cfg, seed);
  if (v == net::Variant::Full) net::init_attention(head, cfg, seed);
  net::init_predictor(head, cfg, v, seed);
  return head;
}

}  // namespace

Model model_from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.meta.value("kind", std::string()) != "stnet-model") {
    throw ConfigError("checkpoint is not a trained shape-estimation model");
  }
  Model model;
  model.cfg = net::config_from_json(ckpt.meta.at("net"));
  model.variant = net::parse_variant(ckpt.meta.at("variant").get<std::string>());
  if (net::uses_images(model.variant)) {
    net::init_encoder(model.encoder, model.cfg, 0);
    if (import_params(model.encoder, ckpt) != model.encoder.size()) {
      throw ConfigError("checkpoint is missing encoder tensors");
    }
  }
  model.head = head_params(model.cfg, model.variant, 0);
  if (import_params(model.head, ckpt) != model.head.size()) {
    throw ConfigError("checkpoint is missing network tensors");
  }
  model.norm.q_scale = ckpt.at("norm.q_scale");
  model.norm.target_mean = ckpt.at("norm.target_mean");
  model.norm.target_std = ckpt.at("norm.target_std");
  return model;
}

// ---------------------------------------------------------------------------
// Training

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("train: learning rate must be positive");
  if (batch < 1) throw ConfigError("train: batch must be >= 1");
}

data::Split dataset_split(const data::Dataset& ds, std::optional<sim::LoadCondition> trial) {
  if (trial && !ds.trial_index(*trial)) {
    throw ConfigError("dataset has no trial '" + sim::to_string(*trial) + "'");
  }
  return data::split_dataset(ds, ds.config().split_ratio, ds.config().seed, trial);
}

std::vector<PointCloud> predict_all(Model& model, const data::Dataset& ds, const std::vector<SampleRef>& refs,
                                    const FeatureCache* cache) {
  std::vector<PointCloud> out;
  out.reserve(refs.size());
  const bool images = net::uses_images(model.variant);
  for (const SampleRef& r : refs) {
    const data::Record& rec = ds.record(r);
    if (!images) {
      out.push_back(model.predict(rec.window, nullptr));
    } else if (cache && cache->contains(r)) {
      out.push_back(model.predict(rec.window, &cache->at(r)));
    } else {
      const Tensor f = model.encode(ds.image(r));
      out.push_back(model.predict(rec.window, &f));
    }
  }
  return out;
}

TrainResult train(const data::Dataset& ds, const TrainConfig& cfg, const ParamStore* encoder,
                  const FeatureCache* cache, std::ostream* progress) {
  cfg.validate();
  TrainResult result;
  Model& model = result.model;
  model.cfg = net::profile_by_name(ds.config().profile);
  model.variant = cfg.variant;
  if (model.cfg.points != ds.config().robot.markers() || model.cfg.window != ds.config().window) {
    throw ConfigError("dataset marker count or window does not match profile '" + model.cfg.profile + "'");
  }
  const bool images = net::uses_images(cfg.variant);
  if (images && !encoder) {
    throw ConfigError("variant " + net::to_string(cfg.variant) + " needs a pretrained encoder (--sfe-ckpt)");
  }
  if (images) model.encoder = *encoder;
  model.head = head_params(model.cfg, cfg.variant, cfg.seed);

  result.split = dataset_split(ds, cfg.trial);
  const auto& train_refs = result.split.train;
  model.norm = Normalizer::fit(ds, train_refs);

  FeatureCache local;
  if (images && !cache) {
    std::vector<SampleRef> used = train_refs;
    used.insert(used.end(), result.split.test.begin(), result.split.test.end());
    local = FeatureCache(ds, model.cfg, model.encoder, used);
    cache = &local;
  }

  std::vector<Tensor> windows;
  std::vector<Tensor> targets;
  for (const SampleRef& r : train_refs) {
    windows.push_back(model.norm.window(ds.record(r).window));
    targets.push_back(model.norm.target(ds.record(r).truth));
  }
  std::vector<PointCloud> test_truth;
  for (const SampleRef& r : result.split.test) test_truth.push_back(ds.record(r).truth);

  Rng rng(mix_seed(cfg.seed, kTrainOrder));
  const std::uint64_t dropout_seed = mix_seed(cfg.seed, kDropout);
  std::uint64_t call_index = 0;
  AdamState adam;
  std::vector<std::size_t> order(train_refs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      const std::size_t end = std::min(order.size(), start + cfg.batch);
      model.head.zero_grad();
      for (std::size_t i = start; i < end; ++i) {
        const std::size_t k = order[i];
        Graph g;
        std::optional<Var> spatial;
        if (images) spatial = g.constant_ref(cache->at(train_refs[k]));
        net::ForwardOptions opts;
        opts.train = true;
        opts.dropout_seed = dropout_seed;
        opts.call_index = call_index++;
        const Var out = net::st_forward_features(g, model.head, model.cfg, cfg.variant, windows[k], spatial, opts);
        const Var loss = net::mse_loss(g, out, g.constant_ref(targets[k]));
        const double value = g.value(loss)[0];
        if (!all_finite(value)) {
          throw DivergenceError("train: non-finite loss in epoch " + std::to_string(epoch));
        }
        loss_sum += value;
        g.backward(loss);
      }
      model.head.scale_grad(1.0 / static_cast<double>(end - start));
      adam_step(model.head, adam, cfg.lr);
    }
    EpochLog log;
    log.epoch = epoch;
    log.train_loss = loss_sum / static_cast<double>(std::max<std::size_t>(order.size(), 1));
    if (!result.split.test.empty()) {
      log.val_rmse = metrics::compute(predict_all(model, ds, result.split.test, cache), test_truth).overall_rmse;
    }
    result.log.push_back(log);
    if (progress) {
      *progress << net::to_string(cfg.variant) << " epoch " << epoch << "/" << cfg.epochs << " loss "
                << metrics::fixed(log.train_loss, 6) << " val_rmse " << metrics::fixed(log.val_rmse, 4)
                << std::endl;
    }
  }
  model.head.clear_grad();
  return result;
}

std::string train_log_csv(const std::vector<EpochLog>& log) {
  std::ostringstream out;
  out << "epoch,train_loss,val_rmse\n";
  for (const auto& e : log) out << e.epoch << ',' << format_real(e.train_loss) << ',' << format_real(e.val_rmse) << '\n';
  return out.str();
}

}  // namespace stnet::training
