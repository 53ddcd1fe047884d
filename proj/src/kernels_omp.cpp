#include <omp.h>

#include <vector>

#include "stnet/kernels.hpp"

namespace stnet::kernels::omp {

namespace {

inline bool in_range(long v, std::size_t extent) {
  return v >= 0 && v < static_cast<long>(extent);
}

}  // namespace

void conv2d_forward(const ConvGeometry& g, std::span<const double> input,
                    std::span<const double> kernel, std::span<const double> bias,
                    std::span<double> output) {
  const long ho_n = static_cast<long>(g.out_height());
  const std::size_t wo_n = g.out_width();
  const std::size_t cin = g.in_channels;
  const std::size_t cout = g.out_channels;

#pragma omp parallel
  {
    std::vector<double> acc(cout);
#pragma omp for schedule(static)
    for (long ho = 0; ho < ho_n; ++ho) {
      for (std::size_t wo = 0; wo < wo_n; ++wo) {
        for (std::size_t co = 0; co < cout; ++co) acc[co] = bias[co];
        for (std::size_t ky = 0; ky < g.kernel; ++ky) {
          const long h = ho * static_cast<long>(g.stride) + static_cast<long>(ky) -
                         static_cast<long>(g.padding);
          if (!in_range(h, g.height)) continue;
          for (std::size_t kx = 0; kx < g.kernel; ++kx) {
            const long w = static_cast<long>(wo * g.stride + kx) - static_cast<long>(g.padding);
            if (!in_range(w, g.width)) continue;
            const double* x = input.data() + (static_cast<std::size_t>(h) * g.width +
                                              static_cast<std::size_t>(w)) * cin;
            const double* k = kernel.data() + (ky * g.kernel + kx) * cin * cout;
            for (std::size_t ci = 0; ci < cin; ++ci) {
              const double xv = x[ci];
              const double* krow = k + ci * cout;
              for (std::size_t co = 0; co < cout; ++co) acc[co] += xv * krow[co];
            }
          }
        }
        double* out = output.data() + (static_cast<std::size_t>(ho) * wo_n + wo) * cout;
        for (std::size_t co = 0; co < cout; ++co) out[co] = acc[co];
      }
    }
  }
}

// Gather formulation: each input pixel collects from the outputs whose window covers it,
// so rows can be split across threads without write conflicts.
void conv2d_backward_input(const ConvGeometry& g, std::span<const double> grad_output,
                           std::span<const double> kernel, std::span<double> grad_input) {
  const std::size_t ho_n = g.out_height();
  const std::size_t wo_n = g.out_width();
  const std::size_t cin = g.in_channels;
  const std::size_t cout = g.out_channels;
  const std::size_t taps = g.kernel * g.kernel;

  // kernel_t[tap][co][ci] so the innermost loop runs over contiguous input channels.
  std::vector<double> kernel_t(taps * cin * cout);
  for (std::size_t tap = 0; tap < taps; ++tap) {
    for (std::size_t ci = 0; ci < cin; ++ci) {
      for (std::size_t co = 0; co < cout; ++co) {
        kernel_t[(tap * cout + co) * cin + ci] = kernel[(tap * cin + ci) * cout + co];
      }
    }
  }

  const long h_n = static_cast<long>(g.height);
#pragma omp parallel
  {
    std::vector<double> acc(cin);
#pragma omp for schedule(static)
    for (long h = 0; h < h_n; ++h) {
      for (std::size_t w = 0; w < g.width; ++w) {
        for (std::size_t ci = 0; ci < cin; ++ci) acc[ci] = 0.0;
        for (std::size_t ky = 0; ky < g.kernel; ++ky) {
          const long num_y = h + static_cast<long>(g.padding) - static_cast<long>(ky);
          if (num_y < 0 || num_y % static_cast<long>(g.stride) != 0) continue;
          const long ho = num_y / static_cast<long>(g.stride);
          if (!in_range(ho, ho_n)) continue;
          for (std::size_t kx = 0; kx < g.kernel; ++kx) {
            const long num_x = static_cast<long>(w + g.padding) - static_cast<long>(kx);
            if (num_x < 0 || num_x % static_cast<long>(g.stride) != 0) continue;
            const long wo = num_x / static_cast<long>(g.stride);
            if (!in_range(wo, wo_n)) continue;
            const double* go = grad_output.data() + (static_cast<std::size_t>(ho) * wo_n +
                                                     static_cast<std::size_t>(wo)) * cout;
            const double* kt = kernel_t.data() + (ky * g.kernel + kx) * cout * cin;
            for (std::size_t co = 0; co < cout; ++co) {
              const double gv = go[co];
              const double* krow = kt + co * cin;
              for (std::size_t ci = 0; ci < cin; ++ci) acc[ci] += gv * krow[ci];
            }
          }
        }
        double* gi = grad_input.data() + (static_cast<std::size_t>(h) * g.width + w) * cin;
        for (std::size_t ci = 0; ci < cin; ++ci) gi[ci] += acc[ci];
      }
    }
  }
}

// One thread per kernel tap; taps own disjoint slices of grad_kernel.
void conv2d_backward_kernel(const ConvGeometry& g, std::span<const double> input,
                            std::span<const double> grad_output, std::span<double> grad_kernel,
                            std::span<double> grad_bias) {
  const std::size_t ho_n = g.out_height();
  const std::size_t wo_n = g.out_width();
  const std::size_t cin = g.in_channels;
  const std::size_t cout = g.out_channels;
  const long taps = static_cast<long>(g.kernel * g.kernel);

#pragma omp parallel for schedule(static)
  for (long tap = 0; tap < taps; ++tap) {
    const std::size_t ky = static_cast<std::size_t>(tap) / g.kernel;
    const std::size_t kx = static_cast<std::size_t>(tap) % g.kernel;
    double* gk = grad_kernel.data() + static_cast<std::size_t>(tap) * cin * cout;
    for (std::size_t ho = 0; ho < ho_n; ++ho) {
      const long h = static_cast<long>(ho * g.stride + ky) - static_cast<long>(g.padding);
      if (!in_range(h, g.height)) continue;
      for (std::size_t wo = 0; wo < wo_n; ++wo) {
        const long w = static_cast<long>(wo * g.stride + kx) - static_cast<long>(g.padding);
        if (!in_range(w, g.width)) continue;
        const double* x = input.data() + (static_cast<std::size_t>(h) * g.width +
                                          static_cast<std::size_t>(w)) * cin;
        const double* go = grad_output.data() + (ho * wo_n + wo) * cout;
        for (std::size_t ci = 0; ci < cin; ++ci) {
          const double xv = x[ci];
          double* row = gk + ci * cout;
          for (std::size_t co = 0; co < cout; ++co) row[co] += xv * go[co];
        }
      }
    }
  }

  for (std::size_t p = 0; p < ho_n * wo_n; ++p) {
    const double* go = grad_output.data() + p * cout;
    for (std::size_t co = 0; co < cout; ++co) grad_bias[co] += go[co];
  }
}

void maxpool2x2_forward(const PoolGeometry& g, std::span<const double> input,
                        std::span<double> output, std::span<std::uint32_t> argmax) {
  const long ho_n = static_cast<long>(g.height / 2);
  const std::size_t wo_n = g.width / 2;
  const std::size_t c_n = g.channels;
#pragma omp parallel for schedule(static)
  for (long ho = 0; ho < ho_n; ++ho) {
    const std::size_t h0 = 2 * static_cast<std::size_t>(ho);
    for (std::size_t wo = 0; wo < wo_n; ++wo) {
      const std::size_t base[4] = {(h0 * g.width + 2 * wo) * c_n,
                                   (h0 * g.width + 2 * wo + 1) * c_n,
                                   ((h0 + 1) * g.width + 2 * wo) * c_n,
                                   ((h0 + 1) * g.width + 2 * wo + 1) * c_n};
      for (std::size_t c = 0; c < c_n; ++c) {
        std::size_t best = base[0] + c;
        for (int q = 1; q < 4; ++q) {
          if (input[base[q] + c] > input[best]) best = base[q] + c;
        }
        const std::size_t o = (static_cast<std::size_t>(ho) * wo_n + wo) * c_n + c;
        output[o] = input[best];
        argmax[o] = static_cast<std::uint32_t>(best);
      }
    }
  }
}

void maxpool2x2_backward(const PoolGeometry& g, std::span<const double> grad_output,
                         std::span<const std::uint32_t> argmax, std::span<double> grad_input) {
  // Pooling windows are disjoint, so every argmax target is written at most once.
  const long n = static_cast<long>((g.height / 2) * (g.width / 2) * g.channels);
#pragma omp parallel for schedule(static)
  for (long o = 0; o < n; ++o) grad_input[argmax[o]] += grad_output[o];
}

void upsample2x_forward(const PoolGeometry& g, std::span<const double> input,
                        std::span<double> output) {
  const long ho_n = static_cast<long>(2 * g.height);
  const std::size_t wo_n = 2 * g.width;
  const std::size_t c_n = g.channels;
#pragma omp parallel for schedule(static)
  for (long ho = 0; ho < ho_n; ++ho) {
    for (std::size_t wo = 0; wo < wo_n; ++wo) {
      const double* src = input.data() + ((static_cast<std::size_t>(ho) / 2) * g.width + wo / 2) * c_n;
      double* dst = output.data() + (static_cast<std::size_t>(ho) * wo_n + wo) * c_n;
      for (std::size_t c = 0; c < c_n; ++c) dst[c] = src[c];
    }
  }
}

void upsample2x_backward(const PoolGeometry& g, std::span<const double> grad_output,
                         std::span<double> grad_input) {
  const long h_n = static_cast<long>(g.height);
  const std::size_t wo_n = 2 * g.width;
  const std::size_t c_n = g.channels;
#pragma omp parallel for schedule(static)
  for (long h = 0; h < h_n; ++h) {
    for (std::size_t w = 0; w < g.width; ++w) {
      double* dst = grad_input.data() + (static_cast<std::size_t>(h) * g.width + w) * c_n;
      for (std::size_t dy = 0; dy < 2; ++dy) {
        for (std::size_t dx = 0; dx < 2; ++dx) {
          const double* src = grad_output.data() +
                              ((2 * static_cast<std::size_t>(h) + dy) * wo_n + 2 * w + dx) * c_n;
          for (std::size_t c = 0; c < c_n; ++c) dst[c] += src[c];
        }
      }
    }
  }
}

}  // namespace stnet::kernels::omp
