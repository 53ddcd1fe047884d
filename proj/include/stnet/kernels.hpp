#pragma once

// Raw numeric kernels behind the differentiable ops. Every kernel exists twice:
// `serial` is the straightforward reference kept for testing, `omp` is the
// OpenMP-parallel version the ops dispatch to. Parallel kernels partition the
// output so each element has exactly one writer; results do not depend on the
// thread count.

#include <cstddef>
#include <cstdint>
#include <span>

namespace stnet::kernels {

struct ConvGeometry {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::size_t padding = 0;

  std::size_t out_height() const noexcept { return (height + 2 * padding - kernel) / stride + 1; }
  std::size_t out_width() const noexcept { return (width + 2 * padding - kernel) / stride + 1; }
};

struct PoolGeometry {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
};

#define STNET_KERNEL_DECLS                                                                    \
  void conv2d_forward(const ConvGeometry& g, std::span<const double> input,                   \
                      std::span<const double> kernel, std::span<const double> bias,           \
                      std::span<double> output);                                              \
  /* grad_input += dL/dinput */                                                               \
  void conv2d_backward_input(const ConvGeometry& g, std::span<const double> grad_output,      \
                             std::span<const double> kernel, std::span<double> grad_input);   \
  /* grad_kernel += dL/dkernel, grad_bias += dL/dbias */                                      \
  void conv2d_backward_kernel(const ConvGeometry& g, std::span<const double> input,          \
                              std::span<const double> grad_output,                            \
                              std::span<double> grad_kernel, std::span<double> grad_bias);    \
  /* argmax holds the flat input index chosen for every output element */                     \
  void maxpool2x2_forward(const PoolGeometry& g, std::span<const double> input,              \
                          std::span<double> output, std::span<std::uint32_t> argmax);         \
  void maxpool2x2_backward(const PoolGeometry& g, std::span<const double> grad_output,        \
                           std::span<const std::uint32_t> argmax, std::span<double> grad_input); \
  /* nearest-neighbour 2x upsampling of an H×W×C map */                                       \
  void upsample2x_forward(const PoolGeometry& g, std::span<const double> input,              \
                          std::span<double> output);                                          \
  void upsample2x_backward(const PoolGeometry& g, std::span<const double> grad_output,       \
                           std::span<double> grad_input);

namespace serial {
STNET_KERNEL_DECLS
}  // namespace serial

namespace omp {
STNET_KERNEL_DECLS
}  // namespace omp

#undef STNET_KERNEL_DECLS

}  // namespace stnet::kernels
