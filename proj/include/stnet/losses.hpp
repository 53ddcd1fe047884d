#pragma once

#include <cstddef>

#include "stnet/graph.hpp"
#include "stnet/net.hpp"

namespace stnet::net {

/// Frozen feature extractor φ: a snapshot of the first `blocks` encoder blocks.
/// Its weights enter graphs as constants, so no gradient can reach them.
class PerceptualExtractor {
 public:
  PerceptualExtractor(const NetConfig& cfg, const ParamStore& encoder, std::size_t blocks = 2);

  std::vector<Var> features(Graph& g, Var image) const;
  std::size_t blocks() const noexcept { return blocks_; }
  const ParamStore& params() const noexcept { return params_; }

 private:
  NetConfig cfg_;
  ParamStore params_;
  std::size_t blocks_;
};

Var mse_loss(Graph& g, Var pred, Var target);
/// Σ over φ's tap layers of ‖φ_i(pred) − φ_i(target)‖².
Var perceptual_loss(Graph& g, const PerceptualExtractor& phi, Var pred, Var target);
Var ssim_index(Graph& g, Var pred, Var target, const SsimConstants& c = {});
/// 1 − SSIM.
Var ssim_loss(Graph& g, Var pred, Var target, const SsimConstants& c = {});

struct CompositeTerms {
  Var total;
  Var mse;
  Var perceptual;
  Var ssim;
};

/// l_m + α·l_p + β·l_s. Throws ParameterError for negative weights.
CompositeTerms sfe_composite_loss(Graph& g, const PerceptualExtractor& phi, Var pred, Var target,
                                  double alpha, double beta, const SsimConstants& c = {});

/// Plain-value SSIM of two H×W×C images.
double ssim_value(const Tensor& pred, const Tensor& target, const SsimConstants& c = {});

}  // namespace stnet::net
