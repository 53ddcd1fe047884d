#include "stnet/losses.hpp"

#include "stnet/errors.hpp"

namespace stnet::net {

PerceptualExtractor::PerceptualExtractor(const NetConfig& cfg, const ParamStore& encoder,
                                         std::size_t blocks)
    : cfg_(cfg), blocks_(blocks) {
  if (blocks == 0 || blocks > cfg.blocks()) {
    throw ConfigError("perceptual extractor: block count " + std::to_string(blocks) +
                      " outside [1, " + std::to_string(cfg.blocks()) + "]");
  }
  for (std::size_t b = 0; b < blocks; ++b) {
    for (const char* conv : {".conv0", ".conv1"}) {
      for (const char* part : {".weight", ".bias"}) {
        const std::string name = "sfe.block" + std::to_string(b) + conv + part;
        params_.add(name, encoder.value(name));
      }
    }
  }
}

std::vector<Var> PerceptualExtractor::features(Graph& g, Var image) const {
  std::vector<Var> taps;
  Var x = image;
  for (std::size_t b = 0; b < blocks_; ++b) {
    for (const char* conv : {".conv0", ".conv1"}) {
      const std::string prefix = "sfe.block" + std::to_string(b) + conv;
      x = relu(g, conv2d(g, x, g.constant_ref(params_.value(prefix + ".weight")),
                         g.constant_ref(params_.value(prefix + ".bias")), 1, 1));
    }
    x = maxpool2x2(g, x);
    taps.push_back(x);
  }
  return taps;
}

Var mse_loss(Graph& g, Var pred, Var target) { return mse(g, pred, target); }

Var perceptual_loss(Graph& g, const PerceptualExtractor& phi, Var pred, Var target) {
  const std::vector<Var> fp = phi.features(g, pred);
  const std::vector<Var> ft = phi.features(g, target);
  Var total = squared_distance(g, fp[0], ft[0]);
  for (std::size_t i = 1; i < fp.size(); ++i) total = add(g, total, squared_distance(g, fp[i], ft[i]));
  return total;
}

Var ssim_index(Graph& g, Var pred, Var target, const SsimConstants& c) {
  if (!(c.c1 > 0.0 && c.c2 > 0.0)) throw ParameterError("SSIM constants must be positive");
  return ssim(g, pred, target, c.c1, c.c2);
}

Var ssim_loss(Graph& g, Var pred, Var target, const SsimConstants& c) {
  const Var s = ssim_index(g, pred, target, c);
  return sub(g, g.constant(Tensor::scalar(1.0)), s);
}

CompositeTerms sfe_composite_loss(Graph& g, const PerceptualExtractor& phi, Var pred, Var target,
                                  double alpha, double beta, const SsimConstants& c) {
  if (alpha < 0.0 || beta < 0.0) throw ParameterError("loss weights alpha, beta must be >= 0");
  CompositeTerms t;
  t.mse = mse_loss(g, pred, target);
  t.perceptual = perceptual_loss(g, phi, pred, target);
  t.ssim = ssim_loss(g, pred, target, c);
  t.total = add(g, t.mse, add(g, scale(g, t.perceptual, alpha), scale(g, t.ssim, beta)));
  return t;
}

double ssim_value(const Tensor& pred, const Tensor& target, const SsimConstants& c) {
  Graph g;
  return g.value(ssim_index(g, g.constant_ref(pred), g.constant_ref(target), c))[0];
}

}  // namespace stnet::net
