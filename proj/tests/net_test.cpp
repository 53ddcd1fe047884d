#include <gtest/gtest.h>

#include "stnet/errors.hpp"
#include "stnet/net.hpp"
#include "support/gradcheck.hpp"

using namespace stnet;
using namespace stnet::net;

namespace {

const Variant kVariants[] = {Variant::Full, Variant::TfeOnly, Variant::SfeOnly, Variant::FfNoAttn};

}  // namespace

TEST(Net, VariantNames) {
  for (Variant v : kVariants) EXPECT_EQ(parse_variant(to_string(v)), v);
  EXPECT_THROW(parse_variant("bogus"), ConfigError);
}

TEST(Net, ProfilesValidate) {
  for (const char* p : {"desk", "tiny", "paper"}) EXPECT_NO_THROW(profile_by_name(p).validate());
  EXPECT_THROW(profile_by_name("huge"), ConfigError);
  NetConfig bad = desk_profile();
  bad.attention_kernel = 4;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = desk_profile();
  bad.image_height = 60;  // not divisible by 2^blocks
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Net, PaperProfileEncoderShape) {
  // 480×640 input, four pooled blocks, widened bottleneck.
  EXPECT_EQ(paper_profile().encoder_output_shape(), (Shape{30, 40, 1024}));
  EXPECT_EQ(desk_profile().encoder_output_shape(), (Shape{4, 4, 64}));
}

TEST(Net, ConfigJsonRoundTrip) {
  const NetConfig c = paper_profile();
  const NetConfig r = config_from_json(to_json(c));
  EXPECT_EQ(to_json(r), to_json(c));
}

TEST(Net, SubnetworksAreSmallerThanFull) {
  const NetConfig cfg = desk_profile();
  const std::size_t full = make_stnet_params(cfg, Variant::Full, 1).parameter_count();
  for (Variant v : {Variant::TfeOnly, Variant::SfeOnly, Variant::FfNoAttn}) {
    EXPECT_LT(make_stnet_params(cfg, v, 1).parameter_count(), full) << to_string(v);
  }
}

TEST(Net, SharedModulesStartIdentical) {
  const NetConfig cfg = desk_profile();
  ParamStore full = make_stnet_params(cfg, Variant::Full, 5);
  ParamStore tfe = make_stnet_params(cfg, Variant::TfeOnly, 5);
  EXPECT_EQ(full.value("tfe.layer0.W_f"), tfe.value("tfe.layer0.W_f"));
}

TEST(Net, ForwardShapesAndAttentionRange) {
  const NetConfig cfg = desk_profile();
  ParamStore p = make_stnet_params(cfg, Variant::Full, 3);
  Graph g;
  const Var img = g.constant(testkit::random_tensor({64, 64, 3}, 1, 0, 1));
  const Tensor window = testkit::random_tensor({cfg.window, 4}, 2);
  std::optional<Var> attention;
  ForwardOptions opts;
  opts.attention_out = &attention;
  const Var out = st_forward(g, p, cfg, Variant::Full, window, img, opts);
  EXPECT_EQ(g.value(out).shape(), (Shape{5, 3}));
  ASSERT_TRUE(attention.has_value());
  EXPECT_EQ(g.value(*attention).shape(), (Shape{4, 4, 1}));
  for (double m : g.value(*attention).values()) {
    EXPECT_GT(m, 0.0);
    EXPECT_LT(m, 1.0);
  }
}

TEST(Net, WrongImageSizeIsDimensionError) {
  const NetConfig cfg = desk_profile();
  ParamStore p = make_stnet_params(cfg, Variant::SfeOnly, 3);
  Graph g;
  const Var img = g.constant(Tensor({32, 32, 3}));
  EXPECT_THROW(sfe_encode(g, p, cfg, img), DimensionError);
}

TEST(Net, EmptyWindowIsContractError) {
  const NetConfig cfg = tiny_profile();
  ParamStore p = make_stnet_params(cfg, Variant::TfeOnly, 3);
  Graph g;
  EXPECT_THROW(tfe_encode(g, p, cfg, Tensor()), ContractError);
}

TEST(Net, PredictorSizeMismatchIsConfigError) {
  const NetConfig cfg = tiny_profile();
  ParamStore p = make_stnet_params(cfg, Variant::TfeOnly, 3);
  Graph g;
  const Tensor window({cfg.window, 4}, 0.1);
  // Features shaped for a different variant than the predictor was built for.
  const Var spatial = g.constant(Tensor(cfg.encoder_output_shape(), 0.5));
  EXPECT_THROW(predict_points(g, p, cfg, spatial, false, 0, 0), ConfigError);
  EXPECT_NO_THROW(st_forward_features(g, p, cfg, Variant::TfeOnly, window, std::nullopt));
}

TEST(Net, AttentionFreeFusionIsConcatenation) {
  const NetConfig cfg = tiny_profile();
  ParamStore p = make_stnet_params(cfg, Variant::FfNoAttn, 3);
  Graph g;
  const Var s = g.constant(testkit::random_tensor(cfg.encoder_output_shape(), 4));
  const Var t = g.constant(testkit::random_tensor({cfg.hidden}, 5));
  const Fusion f = fuse(g, p, cfg, s, t, false);
  EXPECT_FALSE(f.attention.has_value());
  const Tensor expect =
      g.value(concat_channels(g, s, tile_spatial(g, t, cfg.feature_height(), cfg.feature_width())));
  EXPECT_EQ(g.value(f.features), expect);
}

TEST(Net, EvalPredictionIsDeterministic) {
  const NetConfig cfg = tiny_profile();
  ParamStore p = make_stnet_params(cfg, Variant::Full, 3);
  const Tensor img = testkit::random_tensor({8, 8, 3}, 6, 0, 1);
  const Tensor window = testkit::random_tensor({cfg.window, 4}, 7);
  EXPECT_EQ(predict(p, cfg, Variant::Full, window, img), predict(p, cfg, Variant::Full, window, img));
}

TEST(NetGradient, EveryModuleOnTinyProfile) {
  const NetConfig cfg = tiny_profile();
  const Tensor img = testkit::random_tensor({8, 8, 3}, 11, 0, 1);
  const Tensor window = testkit::random_tensor({cfg.window, 4}, 12);
  const Tensor target = testkit::random_tensor({cfg.points, 3}, 13);
  for (Variant v : kVariants) {
    ParamStore p = make_stnet_params(cfg, v, 21);
    const auto r = testkit::check_params(p, [&](Graph& g, ParamStore& s) {
      ForwardOptions opts;
      opts.train = true;
      opts.dropout_seed = 3;
      const Var out = st_forward(g, s, cfg, v, window, g.constant_ref(img), opts);
      return mse(g, out, g.constant_ref(target));
    });
    EXPECT_LT(r.max_rel, 1e-3) << to_string(v) << " worst " << r.worst;
  }
}

TEST(NetGradient, Decoder) {
  const NetConfig cfg = tiny_profile();
  ParamStore p = make_autoencoder_params(cfg, 4);
  const Tensor img = testkit::random_tensor({8, 8, 3}, 14, 0, 1);
  const auto r = testkit::check_params(p, [&](Graph& g, ParamStore& s) {
    const Var x = g.constant_ref(img);
    return mse(g, sfe_decode(g, s, cfg, sfe_encode(g, s, cfg, x)), x);
  });
  EXPECT_LT(r.max_rel, 1e-3) << r.worst;
}
