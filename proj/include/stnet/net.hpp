#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stnet/graph.hpp"
#include "stnet/ops.hpp"
#include "stnet/params.hpp"

namespace stnet::net {

/// Which subnetwork to build. The three ablations are strict subsets of Full.
enum class Variant {
  Full,      // SFE + TFE, attention-weighted fusion, PP
  TfeOnly,   // TFE -> PP
  SfeOnly,   // SFE -> PP
  FfNoAttn,  // SFE + TFE, plain concatenation (attention map fixed to 1), PP
};

std::string to_string(Variant v);
/// Accepts full | tfe_only | sfe_only | ff_noattn. Throws ConfigError otherwise.
Variant parse_variant(const std::string& name);
bool uses_images(Variant v);
bool uses_tendons(Variant v);

struct NetConfig {
  std::string profile = "desk";
  std::size_t image_height = 64;
  std::size_t image_width = 64;
  /// Channel count entering each encoder block followed by the bottleneck width;
  /// ladder.size() - 1 blocks, each halving the spatial size.
  std::vector<std::size_t> ladder{3, 8, 16, 32, 64};
  /// Optional unpooled conv pair after the last block widening to this many
  /// channels (0 disables it).
  std::size_t bottleneck = 0;
  std::size_t tendon_dim = 4;
  std::size_t lstm_layers = 2;
  std::size_t hidden = 16;
  std::size_t attention_kernel = 7;
  double dropout = 0.5;
  std::size_t points = 5;
  std::size_t window = 10;

  /// Throws ConfigError for any violated invariant (odd kernel, divisible image dims, ...).
  void validate() const;
  std::size_t blocks() const { return ladder.size() - 1; }
  std::size_t feature_height() const { return image_height >> blocks(); }
  std::size_t feature_width() const { return image_width >> blocks(); }
  std::size_t feature_channels() const { return bottleneck ? bottleneck : ladder.back(); }
  Shape encoder_output_shape() const;
  /// Length of the flattened vector that feeds the point predictor.
  std::size_t predictor_inputs(Variant v) const;
};

NetConfig desk_profile();
NetConfig paper_profile();
/// Smallest configuration exercising every module; used for gradient checks.
NetConfig tiny_profile();
NetConfig profile_by_name(const std::string& name);

nlohmann::json to_json(const NetConfig& cfg);
NetConfig config_from_json(const nlohmann::json& j);

struct SsimConstants {
  double c1 = 0.01 * 0.01;
  double c2 = 0.03 * 0.03;
};

// Parameter initialisation. Each tensor is drawn from its own stream derived from
// (seed, name), so modules shared between variants start identical.
void init_encoder(ParamStore& params, const NetConfig& cfg, std::uint64_t seed);
void init_decoder(ParamStore& params, const NetConfig& cfg, std::uint64_t seed);
void init_tfe(ParamStore& params, const NetConfig& cfg, std::uint64_t seed);
void init_attention(ParamStore& params, const NetConfig& cfg, std::uint64_t seed);
void init_predictor(ParamStore& params, const NetConfig& cfg, Variant v, std::uint64_t seed);
/// All parameters of the given variant.
ParamStore make_stnet_params(const NetConfig& cfg, Variant v, std::uint64_t seed);
/// Encoder + decoder used for unsupervised pretraining.
ParamStore make_autoencoder_params(const NetConfig& cfg, std::uint64_t seed);

/// Four (or cfg.blocks()) blocks of conv3x3-ReLU ×2 + maxpool2x2.
/// `taps`, when given, receives each block output.
Var sfe_encode(Graph& g, ParamStore& params, const NetConfig& cfg, Var image,
               std::vector<Var>* taps = nullptr);
/// Mirrored decoder: per stage upsample2x + conv3x3-ReLU ×2, last conv sigmoid.
Var sfe_decode(Graph& g, ParamStore& params, const NetConfig& cfg, Var features);

/// window: T×tendon_dim. Zero initial states, returns the top layer's final h.
Var tfe_encode(Graph& g, ParamStore& params, const NetConfig& cfg, const Tensor& window);

struct Fusion {
  Var features;                  // F' (= F when attention is disabled)
  std::optional<Var> attention;  // M, H×W×1
};
Fusion fuse(Graph& g, ParamStore& params, const NetConfig& cfg, Var spatial, Var temporal,
            bool attention);

/// Flatten, dropout, linear to 3n, reshape n×3.
Var predict_points(Graph& g, ParamStore& params, const NetConfig& cfg, Var fused, bool train,
                   std::uint64_t dropout_seed, std::uint64_t call_index);

struct ForwardOptions {
  bool train = false;
  std::uint64_t dropout_seed = 0;
  std::uint64_t call_index = 0;
  /// Filled with the attention map node for the full variant.
  std::optional<Var>* attention_out = nullptr;
};

/// Everything after the encoder, given precomputed spatial features (ignored by TfeOnly).
Var st_forward_features(Graph& g, ParamStore& params, const NetConfig& cfg, Variant v,
                        const Tensor& window, std::optional<Var> spatial,
                        const ForwardOptions& opts = {});
/// Full composition: sfe_encode -> tfe_encode -> fuse -> predict_points.
Var st_forward(Graph& g, ParamStore& params, const NetConfig& cfg, Variant v,
               const Tensor& window, Var image, const ForwardOptions& opts = {});

/// Eval-mode prediction without keeping the graph.
Tensor predict(ParamStore& params, const NetConfig& cfg, Variant v, const Tensor& window,
               const Tensor& image);

}  // namespace stnet::net
