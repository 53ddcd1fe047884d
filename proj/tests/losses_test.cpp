#include <gtest/gtest.h>

#include "stnet/errors.hpp"
#include "stnet/losses.hpp"
#include "support/gradcheck.hpp"

using namespace stnet;
using namespace stnet::net;

namespace {

// Hand form of Eq. 6 for two constant single-value images a and b: zero variance,
// so SSIM = (2ab + c1)/(a² + b² + c1) · c2/c2.
double constant_ssim(double a, double b, double c1) { return (2.0 * a * b + c1) / (a * a + b * b + c1); }

}  // namespace

TEST(Losses, CompositeIsZeroOnIdenticalImages) {
  const NetConfig cfg = desk_profile();
  const ParamStore enc = make_autoencoder_params(cfg, 1);
  const PerceptualExtractor phi(cfg, enc);
  Graph g;
  const Var x = g.constant(testkit::random_tensor({64, 64, 3}, 2, 0, 1));
  const CompositeTerms t = sfe_composite_loss(g, phi, x, x, 0.5, 0.5);
  EXPECT_EQ(g.value(t.total)[0], 0.0);
  EXPECT_EQ(g.value(t.mse)[0], 0.0);
  EXPECT_EQ(g.value(t.perceptual)[0], 0.0);
  EXPECT_NEAR(g.value(t.ssim)[0], 0.0, 1e-15);
}

TEST(Losses, SsimOfImageWithItselfIsOne) {
  const Tensor x = testkit::random_tensor({16, 16, 3}, 3, 0, 1);
  EXPECT_NEAR(ssim_value(x, x), 1.0, 1e-15);
}

TEST(Losses, ConstantImageSsimMatchesClosedForm) {
  const SsimConstants c;
  const double a = 0.3, b = 0.7;
  const double got = ssim_value(Tensor({8, 8, 3}, a), Tensor({8, 8, 3}, b), c);
  EXPECT_NEAR(got, constant_ssim(a, b, c.c1), 1e-12);
  EXPECT_NEAR(got, 0.7241854852611619, 1e-12);
}

TEST(Losses, InvalidWeightsAndConstants) {
  const NetConfig cfg = tiny_profile();
  const ParamStore enc = make_autoencoder_params(cfg, 1);
  const PerceptualExtractor phi(cfg, enc, 1);
  Graph g;
  const Var x = g.constant(Tensor({8, 8, 3}, 0.5));
  EXPECT_THROW(sfe_composite_loss(g, phi, x, x, -0.1, 0.5), ParameterError);
  EXPECT_THROW(ssim_index(g, x, x, {0.0, 9e-4}), ParameterError);
  EXPECT_THROW(PerceptualExtractor(cfg, enc, 2), ConfigError);
}

TEST(Losses, PerceptualWeightsAreFrozen) {
  const NetConfig cfg = desk_profile();
  ParamStore enc = make_autoencoder_params(cfg, 1);
  const PerceptualExtractor phi(cfg, enc);
  Graph g;
  const Var x = g.input(testkit::random_tensor({64, 64, 3}, 4, 0, 1));
  const Var y = g.constant(testkit::random_tensor({64, 64, 3}, 5, 0, 1));
  g.backward(perceptual_loss(g, phi, x, y));
  EXPECT_TRUE(g.has_grad(x));
  EXPECT_FALSE(enc.has_grad("sfe.block0.conv0.weight"));
}

TEST(LossesGradient, CompositeOnTinyImages) {
  const NetConfig cfg = tiny_profile();
  const ParamStore enc = make_autoencoder_params(cfg, 1);
  const PerceptualExtractor phi(cfg, enc, 1);
  const Tensor target = testkit::random_tensor({8, 8, 3}, 6, 0, 1);
  const auto r = testkit::check_inputs({testkit::random_tensor({8, 8, 3}, 7, 0, 1)},
                                       [&](Graph& g, const std::vector<Var>& v) {
                                         return sfe_composite_loss(g, phi, v[0], g.constant_ref(target), 0.5, 0.5).total;
                                       });
  EXPECT_LT(r.max_rel, 1e-3) << r.worst;
}
