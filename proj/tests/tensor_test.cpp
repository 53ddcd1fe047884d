#include <gtest/gtest.h>

#include "stnet/errors.hpp"
#include "stnet/format.hpp"
#include "stnet/tensor.hpp"

using namespace stnet;

TEST(Tensor, ShapeAndFill) {
  Tensor t({2, 3, 4}, 1.5);
  EXPECT_EQ(t.size(), 24u);
  EXPECT_EQ(t.rank(), 3u);
  EXPECT_EQ(t.dim(2), 4u);
  EXPECT_DOUBLE_EQ(t.at(1, 2, 3), 1.5);
  t.at(1, 2, 3) = 7.0;
  EXPECT_DOUBLE_EQ(t[23], 7.0);
}

TEST(Tensor, RejectsZeroAxisAndCountMismatch) {
  EXPECT_THROW(Tensor({2, 0}), DimensionError);
  EXPECT_THROW(Tensor({2, 2}, std::vector<double>{1, 2, 3}), DimensionError);
}

TEST(Tensor, ReshapeKeepsData) {
  const Tensor t({2, 3}, std::vector<double>{1, 2, 3, 4, 5, 6});
  const Tensor r = t.reshaped({3, 2});
  EXPECT_EQ(r.shape(), (Shape{3, 2}));
  EXPECT_DOUBLE_EQ(r[4], 5.0);
  EXPECT_THROW(t.reshaped({4, 2}), DimensionError);
}

TEST(Tensor, MaxAbsDifference) {
  const Tensor a({3}, std::vector<double>{1, 2, 3});
  const Tensor b({3}, std::vector<double>{1, 2.5, 2});
  EXPECT_DOUBLE_EQ(max_abs_difference(a, b), 1.0);
  EXPECT_THROW(max_abs_difference(a, Tensor({2})), DimensionError);
}

TEST(Format, RealsRoundTripExactly) {
  for (double v : {0.1, -1e-300, 123456.789, 1.0 / 3.0, 5e-324}) {
    EXPECT_EQ(parse_real(format_real(v)), v);
  }
  EXPECT_THROW(parse_real("1.5x"), ParseError);
  EXPECT_THROW(parse_real(""), ParseError);
}
