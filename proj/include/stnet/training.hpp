#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "stnet/checkpoint.hpp"
#include "stnet/data.hpp"
#include "stnet/losses.hpp"
#include "stnet/net.hpp"

namespace stnet::training {

// ---------------------------------------------------------------------------
// Unsupervised encoder pretraining

struct PretrainConfig {
  std::size_t epochs = 3;
  std::size_t batch = 16;
  double lr = 1e-3;
  double alpha = 0.5;
  double beta = 0.5;
  /// Images drawn (seeded) from the train split; 0 uses all of them.
  std::size_t max_images = 1024;
  std::size_t validation_images = 32;
  /// Capped at the encoder depth.
  std::size_t perceptual_blocks = 2;
  std::uint64_t seed = 0;

  void validate() const;
};

struct PretrainEpoch {
  std::size_t epoch = 0;
  double loss = 0.0;
  double mse = 0.0;
  double perceptual = 0.0;
  double ssim = 0.0;
  double val_loss = 0.0;
};

struct PretrainResult {
  net::NetConfig cfg;
  ParamStore autoencoder;  // encoder + decoder
  std::vector<PretrainEpoch> log;
  std::vector<data::SampleRef> validation;
};

/// Trains encoder and decoder on l_m + α·l_p + β·l_s. φ is a frozen snapshot of the
/// encoder's initial first blocks. Throws DivergenceError naming the epoch on NaN.
PretrainResult pretrain_sfe(const data::Dataset& ds, const PretrainConfig& cfg,
                            std::ostream* progress = nullptr);

/// Mean composite loss over `refs`, eval mode.
double composite_loss_over(const data::Dataset& ds, const net::NetConfig& cfg, ParamStore& autoencoder,
                           const net::PerceptualExtractor& phi, const std::vector<data::SampleRef>& refs,
                           double alpha, double beta);

std::string pretrain_log_csv(const std::vector<PretrainEpoch>& log);

/// Encoder tensors only, with the network config in meta.
Checkpoint encoder_checkpoint(const PretrainResult& result, const PretrainConfig& cfg);
/// Reads an encoder checkpoint; throws ConfigError if it does not match `cfg`.
ParamStore load_encoder(const Checkpoint& ckpt, const net::NetConfig& cfg);

// ---------------------------------------------------------------------------
// Shape-estimation network

/// Encoder outputs per sample. The encoder stays frozen during ST-Net training,
/// so features are computed once.
class FeatureCache {
 public:
  FeatureCache() = default;
  FeatureCache(const data::Dataset& ds, const net::NetConfig& cfg, ParamStore& encoder,
               const std::vector<data::SampleRef>& refs);
  bool contains(data::SampleRef s) const { return features_.count(s) != 0; }
  const Tensor& at(data::SampleRef s) const;
  std::size_t size() const { return features_.size(); }

 private:
  std::map<data::SampleRef, Tensor> features_;
};

/// Affine maps between raw units and the network's working scale.
struct Normalizer {
  Tensor q_scale;      // [4]; q' = q·scale
  Tensor target_mean;  // n×3
  Tensor target_std;   // n×3

  static Normalizer fit(const data::Dataset& ds, const std::vector<data::SampleRef>& train);
  Tensor window(const Tensor& raw) const;
  Tensor target(const PointCloud& raw) const;
  PointCloud points(const Tensor& normalized) const;
};

struct Model {
  net::NetConfig cfg;
  net::Variant variant = net::Variant::Full;
  ParamStore encoder;  // empty for variants without images
  ParamStore head;     // TFE, attention, predictor
  Normalizer norm;

  PointCloud predict(const Tensor& window, const Tensor* features);
  /// Frozen-encoder features of one image.
  Tensor encode(const Tensor& image);
};

Checkpoint to_checkpoint(const Model& model);
Model model_from_checkpoint(const Checkpoint& ckpt);

struct TrainConfig {
  net::Variant variant = net::Variant::Full;
  std::size_t epochs = 50;
  double lr = 1e-3;
  std::size_t batch = 64;
  std::uint64_t seed = 0;
  /// Restrict training and validation to one trial.
  std::optional<sim::LoadCondition> trial;

  void validate() const;
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_rmse = 0.0;
};

struct TrainResult {
  Model model;
  data::Split split;
  std::vector<EpochLog> log;
};

/// Adam on the mean per-sample MSE of normalised points. Deterministic given the
/// dataset and seed. `encoder` is required for image variants (ConfigError otherwise);
/// `cache`, when given, must hold features for every used sample.
TrainResult train(const data::Dataset& ds, const TrainConfig& cfg, const ParamStore* encoder,
                  const FeatureCache* cache = nullptr, std::ostream* progress = nullptr);

std::string train_log_csv(const std::vector<EpochLog>& log);

/// The split every run uses: stratified per trial, seeded by the dataset.
data::Split dataset_split(const data::Dataset& ds, std::optional<sim::LoadCondition> trial = std::nullopt);

/// Eval-mode predictions in raw units.
std::vector<PointCloud> predict_all(Model& model, const data::Dataset& ds,
                                    const std::vector<data::SampleRef>& refs,
                                    const FeatureCache* cache = nullptr);

}  // namespace stnet::training
