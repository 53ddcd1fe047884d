#include "stnet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "stnet/errors.hpp"
#include "stnet/format.hpp"

namespace stnet::metrics {

std::size_t reported_from(std::size_t markers) { return markers >= 3 ? markers - 3 : 0; }

MetricsTable compute(const std::vector<PointCloud>& predicted, const std::vector<PointCloud>& truth) {
  if (predicted.empty()) throw ContractError("metrics: empty split");
  if (predicted.size() != truth.size()) throw DimensionError("metrics: prediction/truth count mismatch");
  MetricsTable m;
  m.samples = predicted.size();
  m.markers = truth.front().size();
  m.first_reported = reported_from(m.markers);
  std::vector<std::array<double, 3>> sq(m.markers, {0.0, 0.0, 0.0});
  m.max.assign(m.markers, {0.0, 0.0, 0.0});
  for (std::size_t s = 0; s < predicted.size(); ++s) {
    if (predicted[s].size() != m.markers || truth[s].size() != m.markers) {
      throw DimensionError("metrics: sample " + std::to_string(s) + " has wrong marker count");
    }
    for (std::size_t i = 0; i < m.markers; ++i) {
      for (std::size_t a = 0; a < 3; ++a) {
        const double e = predicted[s][i][a] - truth[s][i][a];
        sq[i][a] += e * e;
        m.max[i][a] = std::max(m.max[i][a], std::abs(e));
      }
    }
  }
  const double n = static_cast<double>(m.samples);
  m.rmse.resize(m.markers);
  double reported_sum = 0.0;
  double all_sum = 0.0;
  for (std::size_t i = 0; i < m.markers; ++i) {
    for (std::size_t a = 0; a < 3; ++a) {
      m.rmse[i][a] = std::sqrt(sq[i][a] / n);
      all_sum += sq[i][a];
      if (i >= m.first_reported) {
        reported_sum += sq[i][a];
        m.overall_max = std::max(m.overall_max, m.max[i][a]);
      }
    }
  }
  const double reported = static_cast<double>(m.markers - m.first_reported);
  m.overall_rmse = std::sqrt(reported_sum / (n * 3.0 * reported));
  m.all_rmse = std::sqrt(all_sum / (n * 3.0 * static_cast<double>(m.markers)));
  return m;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

namespace {

const char* kAxes[3] = {"x", "y", "z"};

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

}  // namespace

std::string table1_text(const std::vector<std::pair<std::string, MetricsTable>>& columns) {
  if (columns.empty()) throw ContractError("table1: no columns");
  const MetricsTable& ref = columns.front().second;
  constexpr std::size_t w = 10;
  std::ostringstream out;
  out << pad("", 8);
  for (const auto& [name, _] : columns) out << pad(name, 2 * w);
  out << '\n' << pad("", 8);
  for (std::size_t c = 0; c < columns.size(); ++c) out << pad("RMSE", w) << pad("Max", w);
  out << '\n';
  for (std::size_t i = ref.first_reported; i < ref.markers; ++i) {
    for (std::size_t a = 0; a < 3; ++a) {
      out << pad(kAxes[a] + std::to_string(i + 1), 8);
      for (const auto& [_, m] : columns) out << pad(fixed(m.rmse[i][a]), w) << pad(fixed(m.max[i][a]), w);
      out << '\n';
    }
  }
  out << pad("Overall", 8);
  for (const auto& [_, m] : columns) out << pad(fixed(m.overall_rmse), w) << pad(fixed(m.overall_max), w);
  out << '\n';
  return out.str();
}

std::string table1_csv(const std::vector<std::pair<std::string, MetricsTable>>& columns) {
  if (columns.empty()) throw ContractError("table1: no columns");
  std::ostringstream out;
  out << "variant,row,rmse,max\n";
  for (const auto& [name, m] : columns) {
    for (std::size_t i = 0; i < m.markers; ++i) {
      for (std::size_t a = 0; a < 3; ++a) {
        out << name << ',' << kAxes[a] << i + 1 << ',' << format_real(m.rmse[i][a]) << ','
            << format_real(m.max[i][a]) << '\n';
      }
    }
    out << name << ",overall," << format_real(m.overall_rmse) << ',' << format_real(m.overall_max) << '\n';
    out << name << ",all_markers," << format_real(m.all_rmse) << ",\n";
  }
  return out.str();
}

std::string table2_text(const std::vector<std::pair<std::string, std::vector<LoadRow>>>& columns) {
  if (columns.empty()) throw ContractError("table2: no columns");
  constexpr std::size_t w = 12;
  std::ostringstream out;
  out << pad("load", 8);
  for (const auto& [name, _] : columns) out << pad(name, w);
  out << '\n';
  const auto& rows = columns.front().second;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out << pad(sim::to_string(rows[r].load), 8);
    for (const auto& [_, col] : columns) out << pad(fixed(col.at(r).table.overall_rmse), w);
    out << '\n';
  }
  return out.str();
}

std::string table2_csv(const std::vector<std::pair<std::string, std::vector<LoadRow>>>& columns) {
  std::ostringstream out;
  out << "variant,load,samples,rmse,max\n";
  for (const auto& [name, col] : columns) {
    for (const LoadRow& row : col) {
      out << name << ',' << sim::to_string(row.load) << ',' << row.table.samples << ','
          << format_real(row.table.overall_rmse) << ',' << format_real(row.table.overall_max) << '\n';
    }
  }
  return out.str();
}

}  // namespace stnet::metrics
