#include "stnet/kernels.hpp"

namespace stnet::kernels::serial {

void conv2d_forward(const ConvGeometry& g, std::span<const double> input,
                    std::span<const double> kernel, std::span<const double> bias,
                    std::span<double> output) {
  const std::size_t ho_n = g.out_height();
  const std::size_t wo_n = g.out_width();
  for (std::size_t ho = 0; ho < ho_n; ++ho) {
    for (std::size_t wo = 0; wo < wo_n; ++wo) {
      for (std::size_t co = 0; co < g.out_channels; ++co) {
        double acc = bias[co];
        for (std::size_t ky = 0; ky < g.kernel; ++ky) {
          for (std::size_t kx = 0; kx < g.kernel; ++kx) {
            const long h = static_cast<long>(ho * g.stride + ky) - static_cast<long>(g.padding);
            const long w = static_cast<long>(wo * g.stride + kx) - static_cast<long>(g.padding);
            if (h < 0 || w < 0 || h >= static_cast<long>(g.height) ||
                w >= static_cast<long>(g.width)) {
              continue;
            }
            for (std::size_t ci = 0; ci < g.in_channels; ++ci) {
              const double x = input[(static_cast<std::size_t>(h) * g.width +
                                      static_cast<std::size_t>(w)) * g.in_channels + ci];
              const double k = kernel[((ky * g.kernel + kx) * g.in_channels + ci) * g.out_channels + co];
              acc += x * k;
            }
          }
        }
        output[(ho * wo_n + wo) * g.out_channels + co] = acc;
      }
    }
  }
}

// Scatter formulation: every output gradient is pushed back through its window.
void conv2d_backward_input(const ConvGeometry& g, std::span<const double> grad_output,
                           std::span<const double> kernel, std::span<double> grad_input) {
  const std::size_t ho_n = g.out_height();
  const std::size_t wo_n = g.out_width();
  for (std::size_t ho = 0; ho < ho_n; ++ho) {
    for (std::size_t wo = 0; wo < wo_n; ++wo) {
      for (std::size_t co = 0; co < g.out_channels; ++co) {
        const double go = grad_output[(ho * wo_n + wo) * g.out_channels + co];
        for (std::size_t ky = 0; ky < g.kernel; ++ky) {
          for (std::size_t kx = 0; kx < g.kernel; ++kx) {
            const long h = static_cast<long>(ho * g.stride + ky) - static_cast<long>(g.padding);
            const long w = static_cast<long>(wo * g.stride + kx) - static_cast<long>(g.padding);
            if (h < 0 || w < 0 || h >= static_cast<long>(g.height) ||
                w >= static_cast<long>(g.width)) {
              continue;
            }
            for (std::size_t ci = 0; ci < g.in_channels; ++ci) {
              grad_input[(static_cast<std::size_t>(h) * g.width + static_cast<std::size_t>(w)) *
                             g.in_channels + ci] +=
                  go * kernel[((ky * g.kernel + kx) * g.in_channels + ci) * g.out_channels + co];
            }
          }
        }
      }
    }
  }
}

void conv2d_backward_kernel(const ConvGeometry& g, std::span<const double> input,
                            std::span<const double> grad_output, std::span<double> grad_kernel,
                            std::span<double> grad_bias) {
  const std::size_t ho_n = g.out_height();
  const std::size_t wo_n = g.out_width();
  for (std::size_t ho = 0; ho < ho_n; ++ho) {
    for (std::size_t wo = 0; wo < wo_n; ++wo) {
      for (std::size_t co = 0; co < g.out_channels; ++co) {
        const double go = grad_output[(ho * wo_n + wo) * g.out_channels + co];
        grad_bias[co] += go;
        for (std::size_t ky = 0; ky < g.kernel; ++ky) {
          for (std::size_t kx = 0; kx < g.kernel; ++kx) {
            const long h = static_cast<long>(ho * g.stride + ky) - static_cast<long>(g.padding);
            const long w = static_cast<long>(wo * g.stride + kx) - static_cast<long>(g.padding);
            if (h < 0 || w < 0 || h >= static_cast<long>(g.height) ||
                w >= static_cast<long>(g.width)) {
              continue;
            }
            for (std::size_t ci = 0; ci < g.in_channels; ++ci) {
              grad_kernel[((ky * g.kernel + kx) * g.in_channels + ci) * g.out_channels + co] +=
                  go * input[(static_cast<std::size_t>(h) * g.width + static_cast<std::size_t>(w)) *
                                 g.in_channels + ci];
            }
          }
        }
      }
    }
  }
}

void maxpool2x2_forward(const PoolGeometry& g, std::span<const double> input,
                        std::span<double> output, std::span<std::uint32_t> argmax) {
  const std::size_t ho_n = g.height / 2;
  const std::size_t wo_n = g.width / 2;
  for (std::size_t ho = 0; ho < ho_n; ++ho) {
    for (std::size_t wo = 0; wo < wo_n; ++wo) {
      for (std::size_t c = 0; c < g.channels; ++c) {
        std::size_t best = ((2 * ho) * g.width + 2 * wo) * g.channels + c;
        for (std::size_t dy = 0; dy < 2; ++dy) {
          for (std::size_t dx = 0; dx < 2; ++dx) {
            const std::size_t idx = ((2 * ho + dy) * g.width + 2 * wo + dx) * g.channels + c;
            if (input[idx] > input[best]) best = idx;
          }
        }
        const std::size_t o = (ho * wo_n + wo) * g.channels + c;
        output[o] = input[best];
        argmax[o] = static_cast<std::uint32_t>(best);
      }
    }
  }
}

void maxpool2x2_backward(const PoolGeometry& g, std::span<const double> grad_output,
                         std::span<const std::uint32_t> argmax, std::span<double> grad_input) {
  const std::size_t n = (g.height / 2) * (g.width / 2) * g.channels;
  for (std::size_t o = 0; o < n; ++o) grad_input[argmax[o]] += grad_output[o];
}

void upsample2x_forward(const PoolGeometry& g, std::span<const double> input,
                        std::span<double> output) {
  const std::size_t wo_n = 2 * g.width;
  for (std::size_t ho = 0; ho < 2 * g.height; ++ho) {
    for (std::size_t wo = 0; wo < wo_n; ++wo) {
      for (std::size_t c = 0; c < g.channels; ++c) {
        output[(ho * wo_n + wo) * g.channels + c] =
            input[((ho / 2) * g.width + wo / 2) * g.channels + c];
      }
    }
  }
}

void upsample2x_backward(const PoolGeometry& g, std::span<const double> grad_output,
                         std::span<double> grad_input) {
  const std::size_t wo_n = 2 * g.width;
  for (std::size_t ho = 0; ho < 2 * g.height; ++ho) {
    for (std::size_t wo = 0; wo < wo_n; ++wo) {
      for (std::size_t c = 0; c < g.channels; ++c) {
        grad_input[((ho / 2) * g.width + wo / 2) * g.channels + c] +=
            grad_output[(ho * wo_n + wo) * g.channels + c];
      }
    }
  }
}

}  // namespace stnet::kernels::serial
