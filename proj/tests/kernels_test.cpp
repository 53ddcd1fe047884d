#include <gtest/gtest.h>

#include <vector>

#include "stnet/kernels.hpp"
#include "support/gradcheck.hpp"

using namespace stnet;
using namespace stnet::kernels;

namespace {

std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
  const Tensor t = testkit::random_tensor({n}, seed);
  return {t.values().begin(), t.values().end()};
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

class ConvEquivalence : public ::testing::TestWithParam<ConvGeometry> {};

}  // namespace

TEST(Kernels, ConvHandExample) {
  // 3x3 single-channel input, 2x2 kernel of ones, no padding: each output sums a window.
  const ConvGeometry g{3, 3, 1, 1, 2, 1, 0};
  const std::vector<double> in{1, 2, 3, 4, 5, 6, 7, 8, 9};
  const std::vector<double> k{1, 1, 1, 1};
  const std::vector<double> b{0.5};
  std::vector<double> out(4);
  serial::conv2d_forward(g, in, k, b, out);
  EXPECT_EQ(out, (std::vector<double>{12.5, 16.5, 24.5, 28.5}));
}

TEST_P(ConvEquivalence, SerialMatchesParallel) {
  const ConvGeometry g = GetParam();
  const std::size_t in_n = g.height * g.width * g.in_channels;
  const std::size_t out_n = g.out_height() * g.out_width() * g.out_channels;
  const std::size_t k_n = g.kernel * g.kernel * g.in_channels * g.out_channels;
  const auto in = random_values(in_n, 1);
  const auto k = random_values(k_n, 2);
  const auto b = random_values(g.out_channels, 3);
  const auto go = random_values(out_n, 4);

  std::vector<double> out_s(out_n), out_p(out_n);
  serial::conv2d_forward(g, in, k, b, out_s);
  omp::conv2d_forward(g, in, k, b, out_p);
  EXPECT_LT(max_diff(out_s, out_p), 1e-12);

  std::vector<double> gi_s(in_n, 0.25), gi_p(in_n, 0.25);
  serial::conv2d_backward_input(g, go, k, gi_s);
  omp::conv2d_backward_input(g, go, k, gi_p);
  EXPECT_LT(max_diff(gi_s, gi_p), 1e-12);

  std::vector<double> gk_s(k_n, 0.5), gk_p(k_n, 0.5), gb_s(g.out_channels, 1.0), gb_p(g.out_channels, 1.0);
  serial::conv2d_backward_kernel(g, in, go, gk_s, gb_s);
  omp::conv2d_backward_kernel(g, in, go, gk_p, gb_p);
  EXPECT_LT(max_diff(gk_s, gk_p), 1e-12);
  EXPECT_LT(max_diff(gb_s, gb_p), 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Geometries, ConvEquivalence,
                         ::testing::Values(ConvGeometry{8, 8, 3, 4, 3, 1, 1}, ConvGeometry{5, 7, 2, 3, 3, 1, 1},
                                           ConvGeometry{6, 6, 2, 1, 7, 1, 3}, ConvGeometry{9, 9, 1, 2, 3, 2, 1},
                                           ConvGeometry{4, 4, 5, 5, 1, 1, 0}));

TEST(Kernels, MaxPoolPicksFirstMaximumAndRoutesGradient) {
  const PoolGeometry g{2, 2, 1};
  const std::vector<double> in{3, 5, 5, 1};
  std::vector<double> out(1);
  std::vector<std::uint32_t> arg(1);
  serial::maxpool2x2_forward(g, in, out, arg);
  EXPECT_DOUBLE_EQ(out[0], 5.0);
  EXPECT_EQ(arg[0], 1u);
  std::vector<double> gi(4, 0.0);
  serial::maxpool2x2_backward(g, std::vector<double>{2.0}, arg, gi);
  EXPECT_EQ(gi, (std::vector<double>{0, 2, 0, 0}));
}

TEST(Kernels, PoolAndUpsampleSerialMatchesParallel) {
  const PoolGeometry g{8, 6, 3};
  const auto in = random_values(8 * 6 * 3, 9);
  std::vector<double> os(4 * 3 * 3), op(4 * 3 * 3);
  std::vector<std::uint32_t> as(os.size()), ap(op.size());
  serial::maxpool2x2_forward(g, in, os, as);
  omp::maxpool2x2_forward(g, in, op, ap);
  EXPECT_EQ(os, op);
  EXPECT_EQ(as, ap);
  const auto go = random_values(os.size(), 10);
  std::vector<double> gs(in.size(), 0.0), gp(in.size(), 0.0);
  serial::maxpool2x2_backward(g, go, as, gs);
  omp::maxpool2x2_backward(g, go, ap, gp);
  EXPECT_EQ(gs, gp);

  const PoolGeometry u{4, 3, 3};
  std::vector<double> us(8 * 6 * 3), up(8 * 6 * 3);
  serial::upsample2x_forward(u, os, us);
  omp::upsample2x_forward(u, os, up);
  EXPECT_EQ(us, up);
  std::vector<double> bs(os.size(), 0.0), bp(os.size(), 0.0);
  serial::upsample2x_backward(u, in, bs);
  omp::upsample2x_backward(u, in, bp);
  EXPECT_LT(max_diff(bs, bp), 1e-12);
}
