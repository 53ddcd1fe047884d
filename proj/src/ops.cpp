#include "stnet/ops.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "stnet/errors.hpp"
#include "stnet/kernels.hpp"
#include "stnet/rng.hpp"

namespace stnet {

namespace {

void require_rank(const Tensor& t, std::size_t rank, const char* op, const char* operand) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(op) + ": " + operand + " must have rank " +
                         std::to_string(rank) + ", got " + shape_string(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) +
                         " vs " + shape_string(b.shape()));
  }
}

void accumulate(Tensor& dst, const Tensor& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

double sigmoid_scalar(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Elementwise unary op whose derivative is expressed through its output y.
template <typename Fwd, typename DerivFromOut>
Var unary(Graph& g, Var x, Fwd fwd, DerivFromOut deriv) {
  const Tensor& in = g.value(x);
  Tensor out(in.shape());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = fwd(in[i]);
  return g.emit(std::move(out), {x}, [x, deriv](Graph& gr, Var self) {
    const Tensor& y = gr.value(self);
    const Tensor& go = gr.grad(self);
    Tensor& gx = gr.grad_buffer(x);
    for (std::size_t i = 0; i < y.size(); ++i) gx[i] += go[i] * deriv(y[i]);
  });
}

}  // namespace

Var conv2d(Graph& g, Var input, Var kernel, Var bias, std::size_t stride, std::size_t padding) {
  const Tensor& in = g.value(input);
  const Tensor& k = g.value(kernel);
  const Tensor& b = g.value(bias);
  require_rank(in, 3, "conv2d", "input");
  require_rank(k, 4, "conv2d", "kernel");
  if (k.dim(0) != k.dim(1)) {
    throw DimensionError("conv2d: kernel axes 0 and 1 must match, got " + shape_string(k.shape()));
  }
  if (k.dim(0) % 2 == 0) {
    throw DimensionError("conv2d: kernel axis 0 must be odd, got " + std::to_string(k.dim(0)));
  }
  if (k.dim(2) != in.dim(2)) {
    throw DimensionError("conv2d: kernel axis 2 (input channels) is " + std::to_string(k.dim(2)) +
                         " but input axis 2 has " + std::to_string(in.dim(2)) + " channels");
  }
  if (b.size() != k.dim(3)) {
    throw DimensionError("conv2d: bias axis 0 has " + std::to_string(b.size()) +
                         " entries but kernel axis 3 (output channels) is " +
                         std::to_string(k.dim(3)));
  }
  if (stride == 0) throw DimensionError("conv2d: stride must be >= 1");
  if (in.dim(0) + 2 * padding < k.dim(0)) {
    throw DimensionError("conv2d: input axis 0 (height) too small for kernel");
  }
  if (in.dim(1) + 2 * padding < k.dim(0)) {
    throw DimensionError("conv2d: input axis 1 (width) too small for kernel");
  }

  const kernels::ConvGeometry geo{in.dim(0), in.dim(1), in.dim(2), k.dim(3),
                                  k.dim(0),  stride,    padding};
  Tensor out({geo.out_height(), geo.out_width(), geo.out_channels});
  kernels::omp::conv2d_forward(geo, in.values(), k.values(), b.values(), out.values());

  return g.emit(std::move(out), {input, kernel, bias},
                [input, kernel, bias, geo](Graph& gr, Var self) {
                  const Tensor& go = gr.grad(self);
                  if (gr.requires_grad(input)) {
                    kernels::omp::conv2d_backward_input(geo, go.values(), gr.value(kernel).values(),
                                                        gr.grad_buffer(input).values());
                  }
                  if (gr.requires_grad(kernel) || gr.requires_grad(bias)) {
                    Tensor& gk = gr.grad_buffer(kernel);
                    Tensor& gb = gr.grad_buffer(bias);
                    kernels::omp::conv2d_backward_kernel(geo, gr.value(input).values(), go.values(),
                                                         gk.values(), gb.values());
                  }
                });
}

Var maxpool2x2(Graph& g, Var input) {
  const Tensor& in = g.value(input);
  require_rank(in, 3, "maxpool2x2", "input");
  if (in.dim(0) < 2) throw DimensionError("maxpool2x2: input axis 0 (height) is smaller than 2");
  if (in.dim(1) < 2) throw DimensionError("maxpool2x2: input axis 1 (width) is smaller than 2");
  const kernels::PoolGeometry geo{in.dim(0), in.dim(1), in.dim(2)};
  Tensor out({geo.height / 2, geo.width / 2, geo.channels});
  std::vector<std::uint32_t> argmax(out.size());
  kernels::omp::maxpool2x2_forward(geo, in.values(), out.values(), argmax);
  return g.emit(std::move(out), {input},
                [input, geo, argmax = std::move(argmax)](Graph& gr, Var self) {
                  kernels::omp::maxpool2x2_backward(geo, gr.grad(self).values(), argmax,
                                                    gr.grad_buffer(input).values());
                });
}

Var upsample2x(Graph& g, Var input) {
  const Tensor& in = g.value(input);
  require_rank(in, 3, "upsample2x", "input");
  const kernels::PoolGeometry geo{in.dim(0), in.dim(1), in.dim(2)};
  Tensor out({2 * geo.height, 2 * geo.width, geo.channels});
  kernels::omp::upsample2x_forward(geo, in.values(), out.values());
  return g.emit(std::move(out), {input}, [input, geo](Graph& gr, Var self) {
    kernels::omp::upsample2x_backward(geo, gr.grad(self).values(), gr.grad_buffer(input).values());
  });
}

Var channel_pool(Graph& g, Var input, PoolMode mode) {
  const Tensor& in = g.value(input);
  require_rank(in, 3, "channel_pool", "input");
  const std::size_t pixels = in.dim(0) * in.dim(1);
  const std::size_t channels = in.dim(2);
  Tensor out({in.dim(0), in.dim(1), 1});
  std::vector<std::uint32_t> argmax;
  if (mode == PoolMode::Max) argmax.resize(pixels);
  for (std::size_t p = 0; p < pixels; ++p) {
    const double* px = in.data() + p * channels;
    if (mode == PoolMode::Average) {
      double s = 0.0;
      for (std::size_t c = 0; c < channels; ++c) s += px[c];
      out[p] = s / static_cast<double>(channels);
    } else {
      std::size_t best = 0;
      for (std::size_t c = 1; c < channels; ++c) {
        if (px[c] > px[best]) best = c;
      }
      out[p] = px[best];
      argmax[p] = static_cast<std::uint32_t>(best);
    }
  }
  return g.emit(std::move(out), {input},
                [input, mode, pixels, channels, argmax = std::move(argmax)](Graph& gr, Var self) {
                  const Tensor& go = gr.grad(self);
                  Tensor& gi = gr.grad_buffer(input);
                  for (std::size_t p = 0; p < pixels; ++p) {
                    if (mode == PoolMode::Average) {
                      const double share = go[p] / static_cast<double>(channels);
                      for (std::size_t c = 0; c < channels; ++c) gi[p * channels + c] += share;
                    } else {
                      gi[p * channels + argmax[p]] += go[p];
                    }
                  }
                });
}

Var concat_channels(Graph& g, Var a, Var b) {
  const Tensor& ta = g.value(a);
  const Tensor& tb = g.value(b);
  require_rank(ta, 3, "concat_channels", "first operand");
  require_rank(tb, 3, "concat_channels", "second operand");
  if (ta.dim(0) != tb.dim(0)) throw DimensionError("concat_channels: axis 0 (height) differs");
  if (ta.dim(1) != tb.dim(1)) throw DimensionError("concat_channels: axis 1 (width) differs");
  const std::size_t pixels = ta.dim(0) * ta.dim(1);
  const std::size_t ca = ta.dim(2);
  const std::size_t cb = tb.dim(2);
  Tensor out({ta.dim(0), ta.dim(1), ca + cb});
  for (std::size_t p = 0; p < pixels; ++p) {
    std::copy_n(ta.data() + p * ca, ca, out.data() + p * (ca + cb));
    std::copy_n(tb.data() + p * cb, cb, out.data() + p * (ca + cb) + ca);
  }
  return g.emit(std::move(out), {a, b}, [a, b, pixels, ca, cb](Graph& gr, Var self) {
    const Tensor& go = gr.grad(self);
    if (gr.requires_grad(a)) {
      Tensor& ga = gr.grad_buffer(a);
      for (std::size_t p = 0; p < pixels; ++p) {
        for (std::size_t c = 0; c < ca; ++c) ga[p * ca + c] += go[p * (ca + cb) + c];
      }
    }
    if (gr.requires_grad(b)) {
      Tensor& gb = gr.grad_buffer(b);
      for (std::size_t p = 0; p < pixels; ++p) {
        for (std::size_t c = 0; c < cb; ++c) gb[p * cb + c] += go[p * (ca + cb) + ca + c];
      }
    }
  });
}

Var tile_spatial(Graph& g, Var vec, std::size_t height, std::size_t width) {
  const Tensor& v = g.value(vec);
  const std::size_t d = v.size();
  Tensor out({height, width, d});
  for (std::size_t p = 0; p < height * width; ++p) std::copy_n(v.data(), d, out.data() + p * d);
  return g.emit(std::move(out), {vec}, [vec, d, height, width](Graph& gr, Var self) {
    const Tensor& go = gr.grad(self);
    Tensor& gv = gr.grad_buffer(vec);
    for (std::size_t p = 0; p < height * width; ++p) {
      for (std::size_t k = 0; k < d; ++k) gv[k] += go[p * d + k];
    }
  });
}

Var scale_by_map(Graph& g, Var map, Var features) {
  const Tensor& m = g.value(map);
  const Tensor& f = g.value(features);
  require_rank(m, 3, "scale_by_map", "map");
  require_rank(f, 3, "scale_by_map", "features");
  if (m.dim(2) != 1) throw DimensionError("scale_by_map: map axis 2 must be 1");
  if (m.dim(0) != f.dim(0)) throw DimensionError("scale_by_map: axis 0 (height) differs");
  if (m.dim(1) != f.dim(1)) throw DimensionError("scale_by_map: axis 1 (width) differs");
  const std::size_t pixels = f.dim(0) * f.dim(1);
  const std::size_t channels = f.dim(2);
  Tensor out(f.shape());
  for (std::size_t p = 0; p < pixels; ++p) {
    for (std::size_t c = 0; c < channels; ++c) out[p * channels + c] = m[p] * f[p * channels + c];
  }
  return g.emit(std::move(out), {map, features},
                [map, features, pixels, channels](Graph& gr, Var self) {
                  const Tensor& go = gr.grad(self);
                  const Tensor& mv = gr.value(map);
                  const Tensor& fv = gr.value(features);
                  if (gr.requires_grad(map)) {
                    Tensor& gm = gr.grad_buffer(map);
                    for (std::size_t p = 0; p < pixels; ++p) {
                      double s = 0.0;
                      for (std::size_t c = 0; c < channels; ++c) {
                        s += go[p * channels + c] * fv[p * channels + c];
                      }
                      gm[p] += s;
                    }
                  }
                  if (gr.requires_grad(features)) {
                    Tensor& gf = gr.grad_buffer(features);
                    for (std::size_t p = 0; p < pixels; ++p) {
                      for (std::size_t c = 0; c < channels; ++c) {
                        gf[p * channels + c] += mv[p] * go[p * channels + c];
                      }
                    }
                  }
                });
}

Var linear(Graph& g, Var input, Var weight, Var bias) {
  const Tensor& x = g.value(input);
  const Tensor& w = g.value(weight);
  const Tensor& b = g.value(bias);
  require_rank(w, 2, "linear", "weight");
  const std::size_t d_in = w.dim(0);
  const std::size_t d_out = w.dim(1);
  if (x.size() != d_in) {
    throw DimensionError("linear: input has " + std::to_string(x.size()) +
                         " elements but weight axis 0 is " + std::to_string(d_in));
  }
  if (b.size() != d_out) {
    throw DimensionError("linear: bias has " + std::to_string(b.size()) +
                         " elements but weight axis 1 is " + std::to_string(d_out));
  }
  Tensor out({d_out});
  std::copy_n(b.data(), d_out, out.data());
  for (std::size_t d = 0; d < d_in; ++d) {
    const double xv = x[d];
    const double* row = w.data() + d * d_out;
    for (std::size_t o = 0; o < d_out; ++o) out[o] += xv * row[o];
  }
  return g.emit(std::move(out), {input, weight, bias},
                [input, weight, bias, d_in, d_out](Graph& gr, Var self) {
                  const Tensor& go = gr.grad(self);
                  if (gr.requires_grad(input)) {
                    const Tensor& wv = gr.value(weight);
                    Tensor& gx = gr.grad_buffer(input);
                    for (std::size_t d = 0; d < d_in; ++d) {
                      const double* row = wv.data() + d * d_out;
                      double s = 0.0;
                      for (std::size_t o = 0; o < d_out; ++o) s += row[o] * go[o];
                      gx[d] += s;
                    }
                  }
                  if (gr.requires_grad(weight)) {
                    const Tensor& xv = gr.value(input);
                    Tensor& gw = gr.grad_buffer(weight);
                    for (std::size_t d = 0; d < d_in; ++d) {
                      const double xd = xv[d];
                      if (xd == 0.0) continue;
                      double* row = gw.data() + d * d_out;
                      for (std::size_t o = 0; o < d_out; ++o) row[o] += xd * go[o];
                    }
                  }
                  if (gr.requires_grad(bias)) accumulate(gr.grad_buffer(bias), go);
                });
}

Var concat(Graph& g, Var a, Var b) {
  const Tensor& ta = g.value(a);
  const Tensor& tb = g.value(b);
  const std::size_t na = ta.size();
  const std::size_t nb = tb.size();
  Tensor out({na + nb});
  std::copy_n(ta.data(), na, out.data());
  std::copy_n(tb.data(), nb, out.data() + na);
  return g.emit(std::move(out), {a, b}, [a, b, na, nb](Graph& gr, Var self) {
    const Tensor& go = gr.grad(self);
    if (gr.requires_grad(a)) {
      Tensor& ga = gr.grad_buffer(a);
      for (std::size_t i = 0; i < na; ++i) ga[i] += go[i];
    }
    if (gr.requires_grad(b)) {
      Tensor& gb = gr.grad_buffer(b);
      for (std::size_t i = 0; i < nb; ++i) gb[i] += go[na + i];
    }
  });
}

Var reshape(Graph& g, Var x, Shape shape) {
  Tensor out = g.value(x).reshaped(std::move(shape));
  return g.emit(std::move(out), {x}, [x](Graph& gr, Var self) {
    const Tensor& go = gr.grad(self);
    Tensor& gx = gr.grad_buffer(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += go[i];
  });
}

Var relu(Graph& g, Var x) {
  return unary(
      g, x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double y) { return y > 0.0 ? 1.0 : 0.0; });
}

Var sigmoid(Graph& g, Var x) {
  return unary(g, x, sigmoid_scalar, [](double y) { return y * (1.0 - y); });
}

Var tanh(Graph& g, Var x) {
  return unary(
      g, x, [](double v) { return std::tanh(v); }, [](double y) { return 1.0 - y * y; });
}

Var dropout(Graph& g, Var x, double p, bool train, std::uint64_t seed, std::uint64_t call_index) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw ParameterError("dropout: rate must lie in [0, 1), got " + std::to_string(p));
  }
  if (!train || p == 0.0) return x;
  const Tensor& in = g.value(x);
  std::vector<double> mask(in.size());
  std::uint64_t state = mix_seed(seed, call_index);
  const double keep_scale = 1.0 / (1.0 - p);
  for (double& m : mask) {
    const double u = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
    m = u < p ? 0.0 : keep_scale;
  }
  Tensor out(in.shape());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] * mask[i];
  return g.emit(std::move(out), {x}, [x, mask = std::move(mask)](Graph& gr, Var self) {
    const Tensor& go = gr.grad(self);
    Tensor& gx = gr.grad_buffer(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += go[i] * mask[i];
  });
}

Var add(Graph& g, Var a, Var b) {
  const Tensor& ta = g.value(a);
  const Tensor& tb = g.value(b);
  require_same_shape(ta, tb, "add");
  Tensor out(ta.shape());
  for (std::size_t i = 0; i < ta.size(); ++i) out[i] = ta[i] + tb[i];
  return g.emit(std::move(out), {a, b}, [a, b](Graph& gr, Var self) {
    const Tensor& go = gr.grad(self);
    if (gr.requires_grad(a)) accumulate(gr.grad_buffer(a), go);
    if (gr.requires_grad(b)) accumulate(gr.grad_buffer(b), go);
  });
}

Var sub(Graph& g, Var a, Var b) {
  const Tensor& ta = g.value(a);
  const Tensor& tb = g.value(b);
  require_same_shape(ta, tb, "sub");
  Tensor out(ta.shape());
  for (std::size_t i = 0; i < ta.size(); ++i) out[i] = ta[i] - tb[i];
  return g.emit(std::move(out), {a, b}, [a, b](Graph& gr, Var self) {
    const Tensor& go = gr.grad(self);
    if (gr.requires_grad(a)) accumulate(gr.grad_buffer(a), go);
    if (gr.requires_grad(b)) {
      Tensor& gb = gr.grad_buffer(b);
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= go[i];
    }
  });
}

Var mul(Graph& g, Var a, Var b) {
  const Tensor& ta = g.value(a);
  const Tensor& tb = g.value(b);
  require_same_shape(ta, tb, "mul");
  Tensor out(ta.shape());
  for (std::size_t i = 0; i < ta.size(); ++i) out[i] = ta[i] * tb[i];
  return g.emit(std::move(out), {a, b}, [a, b](Graph& gr, Var self) {
    const Tensor& go = gr.grad(self);
    if (gr.requires_grad(a)) {
      const Tensor& vb = gr.value(b);
      Tensor& ga = gr.grad_buffer(a);
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += go[i] * vb[i];
    }
    if (gr.requires_grad(b)) {
      const Tensor& va = gr.value(a);
      Tensor& gb = gr.grad_buffer(b);
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += go[i] * va[i];
    }
  });
}

Var scale(Graph& g, Var x, double factor) {
  const Tensor& in = g.value(x);
  Tensor out(in.shape());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] * factor;
  return g.emit(std::move(out), {x}, [x, factor](Graph& gr, Var self) {
    const Tensor& go = gr.grad(self);
    Tensor& gx = gr.grad_buffer(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += go[i] * factor;
  });
}

Var sum_squares(Graph& g, Var x) {
  const Tensor& in = g.value(x);
  double s = 0.0;
  for (double v : in.values()) s += v * v;
  return g.emit(Tensor::scalar(s), {x}, [x](Graph& gr, Var self) {
    const double go = gr.grad(self)[0];
    const Tensor& xv = gr.value(x);
    Tensor& gx = gr.grad_buffer(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += 2.0 * xv[i] * go;
  });
}

namespace {

Var squared_difference_sum(Graph& g, Var pred, Var target, double weight, const char* op) {
  const Tensor& p = g.value(pred);
  const Tensor& t = g.value(target);
  require_same_shape(p, t, op);
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - t[i];
    s += d * d;
  }
  return g.emit(Tensor::scalar(s * weight), {pred, target},
                [pred, target, weight](Graph& gr, Var self) {
                  const double go = gr.grad(self)[0] * 2.0 * weight;
                  const Tensor& pv = gr.value(pred);
                  const Tensor& tv = gr.value(target);
                  if (gr.requires_grad(pred)) {
                    Tensor& gp = gr.grad_buffer(pred);
                    for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += go * (pv[i] - tv[i]);
                  }
                  if (gr.requires_grad(target)) {
                    Tensor& gt = gr.grad_buffer(target);
                    for (std::size_t i = 0; i < gt.size(); ++i) gt[i] -= go * (pv[i] - tv[i]);
                  }
                });
}

struct ChannelMoments {
  double mean_x, mean_y, var_x, var_y, cov;
};

ChannelMoments channel_moments(const Tensor& x, const Tensor& y, std::size_t c,
                               std::size_t channels) {
  const std::size_t pixels = x.size() / channels;
  const double n = static_cast<double>(pixels);
  ChannelMoments m{0, 0, 0, 0, 0};
  for (std::size_t p = 0; p < pixels; ++p) {
    m.mean_x += x[p * channels + c];
    m.mean_y += y[p * channels + c];
  }
  m.mean_x /= n;
  m.mean_y /= n;
  for (std::size_t p = 0; p < pixels; ++p) {
    const double dx = x[p * channels + c] - m.mean_x;
    const double dy = y[p * channels + c] - m.mean_y;
    m.var_x += dx * dx;
    m.var_y += dy * dy;
    m.cov += dx * dy;
  }
  m.var_x /= n;
  m.var_y /= n;
  m.cov /= n;
  return m;
}

}  // namespace

Var mse(Graph& g, Var pred, Var target) {
  const double n = static_cast<double>(g.value(pred).size());
  return squared_difference_sum(g, pred, target, 1.0 / n, "mse");
}

Var squared_distance(Graph& g, Var a, Var b) {
  return squared_difference_sum(g, a, b, 1.0, "squared_distance");
}

Var ssim(Graph& g, Var pred, Var target, double c1, double c2) {
  const Tensor& x = g.value(pred);
  const Tensor& y = g.value(target);
  require_same_shape(x, y, "ssim");
  require_rank(x, 3, "ssim", "pred");
  const std::size_t channels = x.dim(2);
  double total = 0.0;
  for (std::size_t c = 0; c < channels; ++c) {
    const ChannelMoments m = channel_moments(x, y, c, channels);
    const double a = 2.0 * m.mean_x * m.mean_y + c1;
    const double b = 2.0 * m.cov + c2;
    const double cc = m.mean_x * m.mean_x + m.mean_y * m.mean_y + c1;
    const double d = m.var_x + m.var_y + c2;
    total += (a * b) / (cc * d);
  }
  const double value = total / static_cast<double>(channels);

  return g.emit(Tensor::scalar(value), {pred, target},
                [pred, target, c1, c2, channels](Graph& gr, Var self) {
                  const double go = gr.grad(self)[0] / static_cast<double>(channels);
                  const Tensor& xv = gr.value(pred);
                  const Tensor& yv = gr.value(target);
                  const std::size_t pixels = xv.size() / channels;
                  const double n = static_cast<double>(pixels);
                  for (std::size_t c = 0; c < channels; ++c) {
                    const ChannelMoments m = channel_moments(xv, yv, c, channels);
                    const double a = 2.0 * m.mean_x * m.mean_y + c1;
                    const double b = 2.0 * m.cov + c2;
                    const double cc = m.mean_x * m.mean_x + m.mean_y * m.mean_y + c1;
                    const double d = m.var_x + m.var_y + c2;
                    const double s = (a * b) / (cc * d);
                    // dS/du_i = S·(A'/A + B'/B − C'/C − D'/D), moments with 1/N normalization.
                    auto push = [&](Var who, const Tensor& u, const Tensor& other, double mean_u,
                                    double mean_other) {
                      Tensor& gu = gr.grad_buffer(who);
                      for (std::size_t p = 0; p < pixels; ++p) {
                        const double du = u[p * channels + c] - mean_u;
                        const double dother = other[p * channels + c] - mean_other;
                        const double da = 2.0 * mean_other / n;
                        const double db = 2.0 * dother / n;
                        const double dc = 2.0 * mean_u / n;
                        const double dd = 2.0 * du / n;
                        gu[p * channels + c] += go * s * (da / a + db / b - dc / cc - dd / d);
                      }
                    };
                    if (gr.requires_grad(pred)) push(pred, xv, yv, m.mean_x, m.mean_y);
                    if (gr.requires_grad(target)) push(target, yv, xv, m.mean_y, m.mean_x);
                  }
                });
}

LstmCellParams bind_lstm_params(Graph& g, ParamStore& store, const std::string& prefix) {
  return LstmCellParams{
      g.param(store, prefix + "W_f"), g.param(store, prefix + "W_i"),
      g.param(store, prefix + "W_o"), g.param(store, prefix + "W_c"),
      g.param(store, prefix + "b_f"), g.param(store, prefix + "b_i"),
      g.param(store, prefix + "b_o"), g.param(store, prefix + "b_c"),
  };
}

LstmState lstm_cell(Graph& g, Var q, const LstmState& prev, const LstmCellParams& p) {
  const std::size_t hidden = g.value(prev.h).size();
  const std::size_t input_dim = g.value(q).size();
  if (g.value(prev.c).size() != hidden) {
    throw DimensionError("lstm_cell: cell state has " + std::to_string(g.value(prev.c).size()) +
                         " entries but hidden state has " + std::to_string(hidden));
  }
  const struct {
    const char* gate;
    Var w;
    Var b;
  } gates[] = {{"forget gate (W_f, b_f)", p.w_f, p.b_f},
               {"input gate (W_i, b_i)", p.w_i, p.b_i},
               {"output gate (W_o, b_o)", p.w_o, p.b_o},
               {"candidate cell (W_c, b_c)", p.w_c, p.b_c}};
  for (const auto& gate : gates) {
    const Tensor& w = g.value(gate.w);
    if (w.rank() != 2 || w.dim(0) != hidden + input_dim || w.dim(1) != hidden) {
      throw DimensionError(std::string("lstm_cell: ") + gate.gate + " weight has shape " +
                           shape_string(w.shape()) + ", expected [" +
                           std::to_string(hidden + input_dim) + "x" + std::to_string(hidden) + "]");
    }
    if (g.value(gate.b).size() != hidden) {
      throw DimensionError(std::string("lstm_cell: ") + gate.gate + " bias has " +
                           std::to_string(g.value(gate.b).size()) + " entries, expected " +
                           std::to_string(hidden));
    }
  }

  const Var hq = concat(g, prev.h, q);
  const Var f = sigmoid(g, linear(g, hq, p.w_f, p.b_f));
  const Var i = sigmoid(g, linear(g, hq, p.w_i, p.b_i));
  const Var o = sigmoid(g, linear(g, hq, p.w_o, p.b_o));
  const Var candidate = tanh(g, linear(g, hq, p.w_c, p.b_c));
  const Var c = add(g, mul(g, f, prev.c), mul(g, i, candidate));
  const Var h = mul(g, o, tanh(g, c));
  return LstmState{h, c};
}

}  // namespace stnet
