#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "stnet/geometry.hpp"
#include "stnet/sim.hpp"

namespace stnet::metrics {

/// Error statistics for one set of predictions.
struct MetricsTable {
  std::size_t samples = 0;
  std::size_t markers = 0;
  /// Markers first_reported+1 .. markers are the reported subset (3–5 for n = 5).
  std::size_t first_reported = 0;
  std::vector<std::array<double, 3>> rmse;  // [marker][axis]
  std::vector<std::array<double, 3>> max;
  /// RMS over reported markers and axes.
  double overall_rmse = 0.0;
  double overall_max = 0.0;
  /// RMS over every marker.
  double all_rmse = 0.0;
};

/// Index of the first reported marker: the last three, or all when n < 3.
std::size_t reported_from(std::size_t markers);

/// Throws ContractError for an empty or mismatched input.
MetricsTable compute(const std::vector<PointCloud>& predicted, const std::vector<PointCloud>& truth);

struct LoadRow {
  sim::LoadCondition load;
  MetricsTable table;
};

/// Per-variant results laid out as Table 1: rows x_i, y_i, z_i for reported markers
/// plus Overall; RMSE and Max columns per variant.
std::string table1_text(const std::vector<std::pair<std::string, MetricsTable>>& columns);
std::string table1_csv(const std::vector<std::pair<std::string, MetricsTable>>& columns);

/// Table 2: overall RMSE per load condition (rows) and variant (columns).
std::string table2_text(const std::vector<std::pair<std::string, std::vector<LoadRow>>>& columns);
std::string table2_csv(const std::vector<std::pair<std::string, std::vector<LoadRow>>>& columns);

/// Fixed-point formatting used by every text table.
std::string fixed(double v, int digits = 4);

}  // namespace stnet::metrics
