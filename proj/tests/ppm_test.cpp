#include <gtest/gtest.h>

#include "stnet/errors.hpp"
#include "stnet/ppm.hpp"
#include "support/gradcheck.hpp"

using namespace stnet;

TEST(Ppm, RoundTripWithinQuantisation) {
  const Tensor img = testkit::random_tensor({5, 7, 3}, 1, 0, 1);
  const Image8 q = quantize(img);
  const Image8 r = decode_ppm(encode_ppm(q));
  EXPECT_EQ(r.pixels, q.pixels);
  EXPECT_LE(max_abs_difference(dequantize(r), img), 0.5 / 255.0 + 1e-15);
}

TEST(Ppm, HeaderCommentsAreSkipped) {
  const std::string bytes = std::string("P6\n# made by hand\n2 1\n255\n") + std::string("\x01\x02\x03\x04\x05\x06", 6);
  const Image8 img = decode_ppm(bytes);
  EXPECT_EQ(img.width, 2u);
  EXPECT_EQ(img.height, 1u);
  EXPECT_EQ(img.pixels[5], 6);
}

TEST(Ppm, TruncatedRasterIsParseError) {
  std::string bytes = encode_ppm(quantize(Tensor({4, 4, 3}, 0.5)));
  bytes.resize(bytes.size() - 5);
  EXPECT_THROW(decode_ppm(bytes), ParseError);
}

TEST(Ppm, MalformedHeadersReportLine) {
  EXPECT_THROW(decode_ppm("P3\n1 1\n255\n"), ParseError);
  try {
    decode_ppm("P6\n2 1\n65535\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
  EXPECT_THROW(decode_ppm("P6\nx 1\n255\n"), ParseError);
}
