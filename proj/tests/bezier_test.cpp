#include <gtest/gtest.h>

#include <cmath>

#include "stnet/bezier.hpp"
#include "stnet/errors.hpp"
#include "stnet/rng.hpp"

using namespace stnet;
using namespace stnet::bezier;

namespace {

BezierCurve planted() {
  BezierCurve c;
  c.control = {Vec3{0, 0, 0}, Vec3{3, -1, 20}, Vec3{12, 4, 45}, Vec3{25, 9, 62}, Vec3{41, 12, 71}};
  return c;
}

std::vector<double> uniform_params(std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t k = 0; k < n; ++k) t[k] = static_cast<double>(k + 1) / static_cast<double>(n);
  return t;
}

PointCloud sample_at(const BezierCurve& c, const std::vector<double>& t) {
  PointCloud p;
  for (double tk : t) p.push_back(evaluate(c, tk));
  return p;
}

}  // namespace

TEST(Bezier, BernsteinPartitionOfUnity) {
  for (double t : {0.0, 0.2, 0.5, 0.9, 1.0}) {
    double s = 0.0;
    for (double b : bernstein(t)) s += b;
    EXPECT_NEAR(s, 1.0, 1e-15);
  }
  EXPECT_THROW(evaluate(planted(), 1.5), ContractError);
}

TEST(Bezier, RecoversPlantedControlPoints) {
  const BezierCurve truth = planted();
  const auto t = uniform_params(9);
  const BezierCurve fit_curve = fit(sample_at(truth, t), t, truth.control[0]);
  for (std::size_t i = 0; i <= kDegree; ++i) {
    for (std::size_t a = 0; a < 3; ++a) EXPECT_NEAR(fit_curve.control[i][a], truth.control[i][a], 1e-8);
  }
}

TEST(Bezier, ResidualIsOrthogonalToBasis) {
  const BezierCurve truth = planted();
  const auto t = uniform_params(12);
  PointCloud pts = sample_at(truth, t);
  Rng rng(3);
  for (Vec3& p : pts) p = p + Vec3{rng.normal(), rng.normal(), rng.normal()};
  const BezierCurve c = fit(pts, t, truth.control[0]);
  for (std::size_t j = 1; j <= kDegree; ++j) {
    for (std::size_t a = 0; a < 3; ++a) {
      double inner = 0.0;
      for (std::size_t k = 0; k < t.size(); ++k) inner += bernstein(t[k])[j] * (pts[k] - evaluate(c, t[k]))[a];
      EXPECT_LT(std::abs(inner), 1e-8) << "basis " << j << " axis " << a;
    }
  }
  EXPECT_LE(objective(c, pts, t), objective(truth, pts, t));
}

TEST(Bezier, BaseIsExact) {
  const Vec3 base{0.1, -0.2, 0.3};
  const auto t = uniform_params(5);
  const BezierCurve c = fit(sample_at(planted(), t), t, base);
  EXPECT_EQ(c.control[0], base);
}

TEST(Bezier, StraightLineIsRepresentedExactly) {
  const PointCloud line{{0, 0, 20}, {0, 0, 40}, {0, 0, 60}, {0, 0, 80}, {0, 0, 100}};
  const auto t = chord_params(line, {0, 0, 0});
  EXPECT_EQ(t, (std::vector<double>{0.2, 0.4, 0.6, 0.8, 1.0}));
  const BezierCurve c = fit(line, t, {0, 0, 0});
  for (std::size_t k = 0; k < line.size(); ++k) EXPECT_LT(norm(evaluate(c, t[k]) - line[k]), 1e-9);
}

TEST(Bezier, NoiseChangesOutputContinuously) {
  const BezierCurve truth = planted();
  const auto t = uniform_params(10);
  const PointCloud clean = sample_at(truth, t);
  double previous = 1e300;
  for (double sigma : {1e-4, 1e-6}) {
    Rng rng(5);
    PointCloud noisy = clean;
    for (Vec3& p : noisy) p = p + sigma * Vec3{rng.normal(), rng.normal(), rng.normal()};
    const BezierCurve c = fit(noisy, t, truth.control[0]);
    double dev = 0.0;
    for (std::size_t i = 0; i <= kDegree; ++i) dev = std::max(dev, norm(c.control[i] - truth.control[i]));
    EXPECT_LT(dev, 1e4 * sigma);
    EXPECT_LT(dev, previous);
    previous = dev;
  }
}

TEST(Bezier, DegenerateInputs) {
  const PointCloud same{{1, 1, 1}, {1, 1, 1}};
  EXPECT_THROW(chord_params(same), DegenerateInputError);
  EXPECT_THROW(chord_params(PointCloud{{0, 0, 0}}, {0, 0, 0}), DegenerateInputError);
  const PointCloud three{{0, 0, 1}, {0, 0, 2}, {0, 0, 3}};
  EXPECT_THROW(fit(three, std::vector<double>{0.3, 0.6, 1.0}, {0, 0, 0}), SingularityError);
  const PointCloud four{{0, 0, 1}, {0, 0, 2}, {0, 0, 3}, {0, 0, 4}};
  EXPECT_THROW(fit(four, std::vector<double>{0.5, 0.5, 1.0, 1.0}, {0, 0, 0}), SingularityError);
  EXPECT_THROW(fit(four, std::vector<double>{0.5, 1.0}, {0, 0, 0}), DimensionError);
}

TEST(Bezier, ChordParamsFromFirstPoint) {
  const auto t = chord_params(PointCloud{{0, 0, 0}, {3, 4, 0}, {3, 4, 5}});
  EXPECT_EQ(t, (std::vector<double>{0.0, 0.5, 1.0}));
}

TEST(Bezier, CurveErrorAgainstOwnSamples) {
  const BezierCurve c = planted();
  const CurveError e = curve_error(c, sample_curve(c, kErrorSamples));
  EXPECT_EQ(e.mean, 0.0);
  EXPECT_EQ(e.max, 0.0);
  EXPECT_THROW(sample_curve(c, 1), ContractError);
}

TEST(Bezier, CsvRowRoundTrip) {
  const BezierCurve c = planted();
  const std::string row = to_csv_row(c);
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), 14);
  EXPECT_EQ(from_csv_row(row).control, c.control);
  EXPECT_THROW(from_csv_row("1,2,3"), ParseError);
}

TEST(Bezier, DerivativesMatchFiniteDifferences) {
  const BezierCurve c = planted();
  for (double t : {0.1, 0.5, 0.8}) {
    const double h = 1e-6;
    const Vec3 fd = (1.0 / (2 * h)) * (evaluate(c, t + h) - evaluate(c, t - h));
    const Vec3 fd2 = (1.0 / (2 * h)) * (derivative(c, t + h) - derivative(c, t - h));
    EXPECT_LT(norm(fd - derivative(c, t)), 1e-6);
    EXPECT_LT(norm(fd2 - second_derivative(c, t)), 1e-5);
  }
}

TEST(Bezier, CurveErrorFindsOffSamplePoints) {
  const BezierCurve c = planted();
  // Points on the curve between sample locations are at distance ~0.
  const PointCloud on{evaluate(c, 0.0012345), evaluate(c, 0.4321), evaluate(c, 0.99876)};
  EXPECT_LT(curve_error(c, on).max, 1e-9);
  // A point offset along the normal of a planar section keeps that offset.
  const BezierCurve line{{Vec3{0, 0, 0}, Vec3{0, 0, 25}, Vec3{0, 0, 50}, Vec3{0, 0, 75}, Vec3{0, 0, 100}}};
  EXPECT_NEAR(curve_error(line, {Vec3{3, 0, 33.3}}).mean, 3.0, 1e-12);
}
