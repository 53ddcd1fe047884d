#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "stnet/errors.hpp"
#include "stnet/metrics.hpp"
#include "stnet/rng.hpp"

using namespace stnet;
using namespace stnet::metrics;

namespace {

std::vector<PointCloud> random_clouds(std::size_t count, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<PointCloud> out(count, PointCloud(n));
  for (auto& c : out) {
    for (auto& p : c) p = {rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(0, 100)};
  }
  return out;
}

}  // namespace

TEST(Metrics, OraclePredictorScoresZero) {
  const auto truth = random_clouds(20, 5, 1);
  const MetricsTable m = compute(truth, truth);
  EXPECT_EQ(m.overall_rmse, 0.0);
  EXPECT_EQ(m.overall_max, 0.0);
  for (const auto& row : m.rmse) {
    for (double v : row) EXPECT_EQ(v, 0.0);
  }
}

TEST(Metrics, ConstantPredictorRmseIsStandardDeviation) {
  const auto truth = random_clouds(50, 5, 2);
  PointCloud mean(5, Vec3{0, 0, 0});
  for (const auto& c : truth) {
    for (std::size_t i = 0; i < 5; ++i) mean[i] = mean[i] + (1.0 / 50.0) * c[i];
  }
  const MetricsTable m = compute(std::vector<PointCloud>(50, mean), truth);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t a = 0; a < 3; ++a) {
      double var = 0.0;
      for (const auto& c : truth) var += (c[i][a] - mean[i][a]) * (c[i][a] - mean[i][a]);
      EXPECT_NEAR(m.rmse[i][a], std::sqrt(var / 50.0), 1e-12);
    }
  }
}

TEST(Metrics, OverallIsBoundedAndUsesReportedMarkers) {
  const auto truth = random_clouds(30, 5, 3);
  auto pred = truth;
  pred[4][0][0] += 100.0;  // marker 1 is not reported
  pred[7][4][2] += 2.0;
  const MetricsTable m = compute(pred, truth);
  EXPECT_EQ(m.first_reported, 2u);
  EXPECT_DOUBLE_EQ(m.overall_max, 2.0);
  EXPECT_NEAR(m.overall_rmse, std::sqrt(4.0 / (30.0 * 9.0)), 1e-15);
  EXPECT_LE(m.overall_rmse, m.overall_max);
  EXPECT_GT(m.all_rmse, m.overall_rmse);
}

TEST(Metrics, Table1HasOneRowPerReportedCoordinatePlusOverall) {
  const auto truth = random_clouds(10, 5, 4);
  const MetricsTable m = compute(random_clouds(10, 5, 5), truth);
  const std::string text = table1_text({{"a", m}, {"b", m}});
  std::istringstream in(text);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  ASSERT_EQ(lines.size(), 2u + 9u + 1u);
  EXPECT_NE(lines[2].find("x3"), std::string::npos);
  EXPECT_NE(lines[10].find("z5"), std::string::npos);
  EXPECT_NE(lines[11].find("Overall"), std::string::npos);
}

TEST(Metrics, EmptyAndMismatchedInputs) {
  EXPECT_THROW(compute({}, {}), ContractError);
  EXPECT_THROW(compute(random_clouds(2, 5, 1), random_clouds(3, 5, 1)), DimensionError);
}
