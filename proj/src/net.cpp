#include "stnet/net.hpp"

#include <cmath>

#include "stnet/errors.hpp"
#include "stnet/rng.hpp"

namespace stnet::net {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::Full:
      return "full";
    case Variant::TfeOnly:
      return "tfe_only";
    case Variant::SfeOnly:
      return "sfe_only";
    case Variant::FfNoAttn:
      return "ff_noattn";
  }
  return "unknown";
}

Variant parse_variant(const std::string& name) {
  if (name == "full") return Variant::Full;
  if (name == "tfe_only") return Variant::TfeOnly;
  if (name == "sfe_only") return Variant::SfeOnly;
  if (name == "ff_noattn") return Variant::FfNoAttn;
  throw ConfigError("unknown variant '" + name + "' (expected full|tfe_only|sfe_only|ff_noattn)");
}

bool uses_images(Variant v) { return v != Variant::TfeOnly; }
bool uses_tendons(Variant v) { return v != Variant::SfeOnly; }

void NetConfig::validate() const {
  if (ladder.size() < 2) throw ConfigError("ladder needs at least an input and one block width");
  if (ladder.front() != 3) throw ConfigError("ladder must start at 3 (RGB input)");
  for (std::size_t c : ladder) {
    if (c == 0) throw ConfigError("ladder entries must be positive");
  }
  const std::size_t factor = std::size_t{1} << blocks();
  if (image_height == 0 || image_height % factor != 0) {
    throw ConfigError("image height " + std::to_string(image_height) + " is not divisible by 2^" +
                      std::to_string(blocks()));
  }
  if (image_width == 0 || image_width % factor != 0) {
    throw ConfigError("image width " + std::to_string(image_width) + " is not divisible by 2^" +
                      std::to_string(blocks()));
  }
  if (attention_kernel % 2 == 0) throw ConfigError("attention kernel size must be odd");
  if (points < 2) throw ConfigError("point count n must be at least 2");
  if (hidden == 0 || lstm_layers == 0) throw ConfigError("LSTM needs >= 1 layer and hidden > 0");
  if (tendon_dim == 0) throw ConfigError("tendon dimension must be positive");
  if (window == 0) throw ConfigError("window length must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
}

Shape NetConfig::encoder_output_shape() const {
  return {feature_height(), feature_width(), feature_channels()};
}

std::size_t NetConfig::predictor_inputs(Variant v) const {
  const std::size_t pixels = feature_height() * feature_width();
  switch (v) {
    case Variant::TfeOnly:
      return hidden;
    case Variant::SfeOnly:
      return pixels * feature_channels();
    case Variant::Full:
    case Variant::FfNoAttn:
      return pixels * (feature_channels() + hidden);
  }
  return 0;
}

NetConfig desk_profile() { return NetConfig{}; }

NetConfig paper_profile() {
  NetConfig cfg;
  cfg.profile = "paper";
  cfg.image_height = 480;
  cfg.image_width = 640;
  cfg.ladder = {3, 64, 128, 256, 512};
  cfg.bottleneck = 1024;
  cfg.hidden = 100;
  return cfg;
}

NetConfig tiny_profile() {
  NetConfig cfg;
  cfg.profile = "tiny";
  cfg.image_height = 8;
  cfg.image_width = 8;
  cfg.ladder = {3, 4};
  cfg.hidden = 4;
  cfg.points = 2;
  cfg.window = 3;
  return cfg;
}

NetConfig profile_by_name(const std::string& name) {
  if (name == "desk") return desk_profile();
  if (name == "paper") return paper_profile();
  if (name == "tiny") return tiny_profile();
  throw ConfigError("unknown profile '" + name + "' (expected desk|paper|tiny)");
}

nlohmann::json to_json(const NetConfig& cfg) {
  return {{"profile", cfg.profile},
          {"image_height", cfg.image_height},
          {"image_width", cfg.image_width},
          {"ladder", cfg.ladder},
          {"bottleneck", cfg.bottleneck},
          {"tendon_dim", cfg.tendon_dim},
          {"lstm_layers", cfg.lstm_layers},
          {"hidden", cfg.hidden},
          {"attention_kernel", cfg.attention_kernel},
          {"dropout", cfg.dropout},
          {"points", cfg.points},
          {"window", cfg.window}};
}

NetConfig config_from_json(const nlohmann::json& j) {
  NetConfig cfg;
  try {
    cfg.profile = j.at("profile").get<std::string>();
    cfg.image_height = j.at("image_height").get<std::size_t>();
    cfg.image_width = j.at("image_width").get<std::size_t>();
    cfg.ladder = j.at("ladder").get<std::vector<std::size_t>>();
    cfg.bottleneck = j.value("bottleneck", std::size_t{0});
    cfg.tendon_dim = j.at("tendon_dim").get<std::size_t>();
    cfg.lstm_layers = j.at("lstm_layers").get<std::size_t>();
    cfg.hidden = j.at("hidden").get<std::size_t>();
    cfg.attention_kernel = j.at("attention_kernel").get<std::size_t>();
    cfg.dropout = j.at("dropout").get<double>();
    cfg.points = j.at("points").get<std::size_t>();
    cfg.window = j.at("window").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("NetConfig JSON: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------
// Initialisation

namespace {

std::uint64_t name_hash(const std::string& name) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : name) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  return h;
}

Tensor uniform_tensor(Shape shape, double bound, std::uint64_t seed, const std::string& name) {
  Rng rng(mix_seed(seed, name_hash(name)));
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.uniform(-bound, bound);
  return t;
}

void add_conv(ParamStore& params, const std::string& prefix, std::size_t k, std::size_t cin,
              std::size_t cout, std::uint64_t seed) {
  // He-uniform for ReLU stacks.
  const double bound = std::sqrt(6.0 / static_cast<double>(k * k * cin));
  params.add(prefix + ".weight", uniform_tensor({k, k, cin, cout}, bound, seed, prefix + ".weight"));
  params.add(prefix + ".bias", Tensor({cout}, 0.0));
}

std::string block_name(std::size_t b) { return "sfe.block" + std::to_string(b); }
std::string stage_name(std::size_t b) { return "dec.stage" + std::to_string(b); }

}  // namespace

void init_encoder(ParamStore& params, const NetConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  for (std::size_t b = 0; b < cfg.blocks(); ++b) {
    add_conv(params, block_name(b) + ".conv0", 3, cfg.ladder[b], cfg.ladder[b + 1], seed);
    add_conv(params, block_name(b) + ".conv1", 3, cfg.ladder[b + 1], cfg.ladder[b + 1], seed);
  }
  if (cfg.bottleneck) {
    add_conv(params, "sfe.bottleneck.conv0", 3, cfg.ladder.back(), cfg.bottleneck, seed);
    add_conv(params, "sfe.bottleneck.conv1", 3, cfg.bottleneck, cfg.bottleneck, seed);
  }
}

void init_decoder(ParamStore& params, const NetConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (cfg.bottleneck) {
    add_conv(params, "dec.bottleneck.conv0", 3, cfg.bottleneck, cfg.bottleneck, seed);
    add_conv(params, "dec.bottleneck.conv1", 3, cfg.bottleneck, cfg.ladder.back(), seed);
  }
  for (std::size_t b = cfg.blocks(); b-- > 0;) {
    add_conv(params, stage_name(b) + ".conv0", 3, cfg.ladder[b + 1], cfg.ladder[b + 1], seed);
    add_conv(params, stage_name(b) + ".conv1", 3, cfg.ladder[b + 1], cfg.ladder[b], seed);
  }
}

void init_tfe(ParamStore& params, const NetConfig& cfg, std::uint64_t seed) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.hidden));
  for (std::size_t l = 0; l < cfg.lstm_layers; ++l) {
    const std::size_t in_dim = l == 0 ? cfg.tendon_dim : cfg.hidden;
    const std::string prefix = "tfe.layer" + std::to_string(l) + ".";
    for (const char* gate : {"f", "i", "o", "c"}) {
      const std::string w = prefix + "W_" + gate;
      const std::string b = prefix + "b_" + gate;
      params.add(w, uniform_tensor({cfg.hidden + in_dim, cfg.hidden}, bound, seed, w));
      params.add(b, uniform_tensor({cfg.hidden}, bound, seed, b));
    }
  }
}

void init_attention(ParamStore& params, const NetConfig& cfg, std::uint64_t seed) {
  const std::size_t k = cfg.attention_kernel;
  const double bound = 1.0 / std::sqrt(static_cast<double>(k * k * 2));
  params.add("ff.attention.weight",
             uniform_tensor({k, k, 2, 1}, bound, seed, "ff.attention.weight"));
  params.add("ff.attention.bias", Tensor({1}, 0.0));
}

void init_predictor(ParamStore& params, const NetConfig& cfg, Variant v, std::uint64_t seed) {
  const std::size_t inputs = cfg.predictor_inputs(v);
  const double bound = 1.0 / std::sqrt(static_cast<double>(inputs));
  params.add("pp.weight", uniform_tensor({inputs, 3 * cfg.points}, bound, seed,
                                         "pp.weight." + to_string(v)));
  params.add("pp.bias", Tensor({3 * cfg.points}, 0.0));
}

ParamStore make_stnet_params(const NetConfig& cfg, Variant v, std::uint64_t seed) {
  cfg.validate();
  ParamStore params;
  if (uses_images(v)) init_encoder(params, cfg, seed);
  if (uses_tendons(v)) init_tfe(params, cfg, seed);
  if (v == Variant::Full) init_attention(params, cfg, seed);
  init_predictor(params, cfg, v, seed);
  return params;
}

ParamStore make_autoencoder_params(const NetConfig& cfg, std::uint64_t seed) {
  ParamStore params;
  init_encoder(params, cfg, seed);
  init_decoder(params, cfg, seed);
  return params;
}

// ---------------------------------------------------------------------------
// Forward

namespace {

Var conv_relu(Graph& g, ParamStore& params, const std::string& prefix, Var x) {
  return relu(g, conv2d(g, x, g.param(params, prefix + ".weight"),
                        g.param(params, prefix + ".bias"), 1, 1));
}

}  // namespace

Var sfe_encode(Graph& g, ParamStore& params, const NetConfig& cfg, Var image,
               std::vector<Var>* taps) {
  const Tensor& img = g.value(image);
  if (img.shape() != Shape{cfg.image_height, cfg.image_width, 3}) {
    throw DimensionError("sfe_encode: image has shape " + shape_string(img.shape()) +
                         ", expected " +
                         shape_string({cfg.image_height, cfg.image_width, 3}));
  }
  Var x = image;
  for (std::size_t b = 0; b < cfg.blocks(); ++b) {
    x = conv_relu(g, params, block_name(b) + ".conv0", x);
    x = conv_relu(g, params, block_name(b) + ".conv1", x);
    x = maxpool2x2(g, x);
    if (taps) taps->push_back(x);
  }
  if (cfg.bottleneck) {
    x = conv_relu(g, params, "sfe.bottleneck.conv0", x);
    x = conv_relu(g, params, "sfe.bottleneck.conv1", x);
  }
  return x;
}

Var sfe_decode(Graph& g, ParamStore& params, const NetConfig& cfg, Var features) {
  if (g.value(features).shape() != cfg.encoder_output_shape()) {
    throw DimensionError("sfe_decode: features have shape " +
                         shape_string(g.value(features).shape()) + ", expected " +
                         shape_string(cfg.encoder_output_shape()));
  }
  Var x = features;
  if (cfg.bottleneck) {
    x = conv_relu(g, params, "dec.bottleneck.conv0", x);
    x = conv_relu(g, params, "dec.bottleneck.conv1", x);
  }
  for (std::size_t b = cfg.blocks(); b-- > 0;) {
    x = upsample2x(g, x);
    x = conv_relu(g, params, stage_name(b) + ".conv0", x);
    const std::string last = stage_name(b) + ".conv1";
    x = conv2d(g, x, g.param(params, last + ".weight"), g.param(params, last + ".bias"), 1, 1);
    x = b == 0 ? sigmoid(g, x) : relu(g, x);
  }
  return x;
}

Var tfe_encode(Graph& g, ParamStore& params, const NetConfig& cfg, const Tensor& window) {
  if (window.rank() != 2 || window.dim(0) == 0) {
    throw ContractError("tfe_encode: window must be a non-empty T×" +
                        std::to_string(cfg.tendon_dim) + " matrix");
  }
  if (window.dim(1) != cfg.tendon_dim) {
    throw DimensionError("tfe_encode: window axis 1 is " + std::to_string(window.dim(1)) +
                         ", expected " + std::to_string(cfg.tendon_dim));
  }
  std::vector<LstmCellParams> layers;
  std::vector<LstmState> states;
  for (std::size_t l = 0; l < cfg.lstm_layers; ++l) {
    layers.push_back(bind_lstm_params(g, params, "tfe.layer" + std::to_string(l) + "."));
    states.push_back({g.constant(Tensor({cfg.hidden}, 0.0)), g.constant(Tensor({cfg.hidden}, 0.0))});
  }
  const std::size_t steps = window.dim(0);
  for (std::size_t t = 0; t < steps; ++t) {
    std::vector<double> q(window.data() + t * cfg.tendon_dim,
                          window.data() + (t + 1) * cfg.tendon_dim);
    Var x = g.constant(Tensor::vector(std::move(q)));
    for (std::size_t l = 0; l < cfg.lstm_layers; ++l) {
      states[l] = lstm_cell(g, x, states[l], layers[l]);
      x = states[l].h;
    }
  }
  return states.back().h;
}

Fusion fuse(Graph& g, ParamStore& params, const NetConfig& cfg, Var spatial, Var temporal,
            bool attention) {
  const Tensor& s = g.value(spatial);
  if (s.rank() != 3) throw DimensionError("fuse: spatial features must be H×W×C");
  const Var tiled = tile_spatial(g, temporal, s.dim(0), s.dim(1));
  const Var f = concat_channels(g, spatial, tiled);
  if (!attention) return Fusion{f, std::nullopt};

  const Var pooled = concat_channels(g, channel_pool(g, f, PoolMode::Average),
                                     channel_pool(g, f, PoolMode::Max));
  const Var logits = conv2d(g, pooled, g.param(params, "ff.attention.weight"),
                            g.param(params, "ff.attention.bias"), 1, cfg.attention_kernel / 2);
  const Var m = sigmoid(g, logits);
  return Fusion{scale_by_map(g, m, f), m};
}

Var predict_points(Graph& g, ParamStore& params, const NetConfig& cfg, Var fused, bool train,
                   std::uint64_t dropout_seed, std::uint64_t call_index) {
  const std::size_t flat = g.value(fused).size();
  const Tensor& w = params.value("pp.weight");
  if (w.rank() != 2 || w.dim(0) != flat || w.dim(1) != 3 * cfg.points) {
    throw ConfigError("predict_points: flattened features have " + std::to_string(flat) +
                      " entries but W_fc has shape " + shape_string(w.shape()) + ", expected [" +
                      std::to_string(flat) + "x" + std::to_string(3 * cfg.points) + "]");
  }
  Var x = reshape(g, fused, {flat});
  x = dropout(g, x, cfg.dropout, train, dropout_seed, call_index);
  x = linear(g, x, g.param(params, "pp.weight"), g.param(params, "pp.bias"));
  return reshape(g, x, {cfg.points, 3});
}

Var st_forward_features(Graph& g, ParamStore& params, const NetConfig& cfg, Variant v,
                        const Tensor& window, std::optional<Var> spatial,
                        const ForwardOptions& opts) {
  Var fused;
  if (v == Variant::TfeOnly) {
    fused = tfe_encode(g, params, cfg, window);
  } else {
    if (!spatial) throw ContractError("st_forward: variant " + to_string(v) + " needs image features");
    if (v == Variant::SfeOnly) {
      fused = *spatial;
    } else {
      const Var temporal = tfe_encode(g, params, cfg, window);
      Fusion fusion = fuse(g, params, cfg, *spatial, temporal, v == Variant::Full);
      fused = fusion.features;
      if (opts.attention_out) *opts.attention_out = fusion.attention;
    }
  }
  return predict_points(g, params, cfg, fused, opts.train, opts.dropout_seed, opts.call_index);
}

Var st_forward(Graph& g, ParamStore& params, const NetConfig& cfg, Variant v,
               const Tensor& window, Var image, const ForwardOptions& opts) {
  std::optional<Var> spatial;
  if (uses_images(v)) spatial = sfe_encode(g, params, cfg, image);
  return st_forward_features(g, params, cfg, v, window, spatial, opts);
}

Tensor predict(ParamStore& params, const NetConfig& cfg, Variant v, const Tensor& window,
               const Tensor& image) {
  Graph g;
  const Var img = g.constant_ref(image);
  return g.value(st_forward(g, params, cfg, v, window, img));
}

}  // namespace stnet::net
