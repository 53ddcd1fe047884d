#include "stnet/bezier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "stnet/errors.hpp"
#include "stnet/format.hpp"

namespace stnet::bezier {

std::array<double, kDegree + 1> bernstein(double t) {
  const double s = 1.0 - t;
  return {s * s * s * s, 4.0 * s * s * s * t, 6.0 * s * s * t * t, 4.0 * s * t * t * t,
          t * t * t * t};
}

Vec3 evaluate(const BezierCurve& curve, double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw ContractError("bezier evaluate: t = " + std::to_string(t) + " outside [0, 1]");
  }
  const auto b = bernstein(t);
  Vec3 out{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i <= kDegree; ++i) out = out + b[i] * curve.control[i];
  return out;
}

namespace {

std::vector<double> normalised_cumulative(const PointCloud& path) {
  std::vector<double> cumulative(path.size(), 0.0);
  for (std::size_t k = 1; k < path.size(); ++k) {
    cumulative[k] = cumulative[k - 1] + norm(path[k] - path[k - 1]);
  }
  const double total = cumulative.back();
  if (!(total > 0.0)) throw DegenerateInputError("chord_params: total chord length is zero");
  for (double& c : cumulative) c /= total;
  cumulative.back() = 1.0;
  return cumulative;
}

}  // namespace

std::vector<double> chord_params(const PointCloud& points) {
  if (points.size() < 2) throw ContractError("chord_params: need at least two points");
  return normalised_cumulative(points);
}

std::vector<double> chord_params(const PointCloud& points, const Vec3& base) {
  if (points.empty()) throw ContractError("chord_params: need at least one point");
  PointCloud path;
  path.reserve(points.size() + 1);
  path.push_back(base);
  path.insert(path.end(), points.begin(), points.end());
  std::vector<double> t = normalised_cumulative(path);
  t.erase(t.begin());
  return t;
}

BezierCurve fit(const PointCloud& points, std::span<const double> params, const Vec3& base) {
  constexpr std::size_t kFree = kDegree;  // p1..p4
  if (points.size() != params.size()) {
    throw DimensionError("bezier fit: " + std::to_string(points.size()) + " points but " +
                         std::to_string(params.size()) + " parameters");
  }
  const std::set<double> distinct(params.begin(), params.end());
  if (distinct.size() < kFree) {
    throw SingularityError("bezier fit: " + std::to_string(distinct.size()) +
                           " distinct parameters, need at least " + std::to_string(kFree));
  }
  for (double t : params) {
    if (!(t >= 0.0 && t <= 1.0)) throw ContractError("bezier fit: parameter outside [0, 1]");
  }

  // Normal equations (AᵀA) x = Aᵀ y with A_kj = b_{j+1}(t_k), y_k = P_k − b_0(t_k)·base.
  double normal[kFree][kFree] = {};
  double rhs[kFree][3] = {};
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto b = bernstein(params[k]);
    const Vec3 y = points[k] - b[0] * base;
    for (std::size_t i = 0; i < kFree; ++i) {
      for (std::size_t j = 0; j < kFree; ++j) normal[i][j] += b[i + 1] * b[j + 1];
      for (std::size_t a = 0; a < 3; ++a) rhs[i][a] += b[i + 1] * y[a];
    }
  }

  // Cholesky: normal = L Lᵀ.
  double lower[kFree][kFree] = {};
  double trace = 0.0;
  for (std::size_t i = 0; i < kFree; ++i) trace += normal[i][i];
  for (std::size_t j = 0; j < kFree; ++j) {
    double diag = normal[j][j];
    for (std::size_t k = 0; k < j; ++k) diag -= lower[j][k] * lower[j][k];
    if (!(diag > 1e-14 * trace)) {
      throw SingularityError("bezier fit: normal matrix is numerically singular");
    }
    lower[j][j] = std::sqrt(diag);
    for (std::size_t i = j + 1; i < kFree; ++i) {
      double v = normal[i][j];
      for (std::size_t k = 0; k < j; ++k) v -= lower[i][k] * lower[j][k];
      lower[i][j] = v / lower[j][j];
    }
  }

  BezierCurve curve;
  curve.control[0] = base;
  for (std::size_t a = 0; a < 3; ++a) {
    double z[kFree];
    for (std::size_t i = 0; i < kFree; ++i) {
      double v = rhs[i][a];
      for (std::size_t k = 0; k < i; ++k) v -= lower[i][k] * z[k];
      z[i] = v / lower[i][i];
    }
    double x[kFree];
    for (std::size_t i = kFree; i-- > 0;) {
      double v = z[i];
      for (std::size_t k = i + 1; k < kFree; ++k) v -= lower[k][i] * x[k];
      x[i] = v / lower[i][i];
    }
    for (std::size_t i = 0; i < kFree; ++i) curve.control[i + 1][a] = x[i];
  }
  return curve;
}

double objective(const BezierCurve& curve, const PointCloud& points, std::span<const double> params) {
  if (points.size() != params.size()) throw DimensionError("objective: points/params size mismatch");
  double j = 0.0;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const Vec3 r = points[k] - evaluate(curve, params[k]);
    j += dot(r, r);
  }
  return j;
}

PointCloud sample_curve(const BezierCurve& curve, std::size_t m) {
  if (m < 2) throw ContractError("sample_curve: need m >= 2");
  PointCloud out;
  out.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double t = j + 1 == m ? 1.0 : static_cast<double>(j) / static_cast<double>(m - 1);
    out.push_back(evaluate(curve, t));
  }
  return out;
}

Vec3 derivative(const BezierCurve& curve, double t) {
  const auto& p = curve.control;
  const double s = 1.0 - t;
  const double b[4] = {s * s * s, 3.0 * s * s * t, 3.0 * s * t * t, t * t * t};
  Vec3 out{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < 4; ++i) out = out + (4.0 * b[i]) * (p[i + 1] - p[i]);
  return out;
}

Vec3 second_derivative(const BezierCurve& curve, double t) {
  const auto& p = curve.control;
  const double s = 1.0 - t;
  const double b[3] = {s * s, 2.0 * s * t, t * t};
  Vec3 out{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < 3; ++i) out = out + (12.0 * b[i]) * (p[i + 2] - 2.0 * p[i + 1] + p[i]);
  return out;
}

namespace {

// Minimises ‖B(t) − r‖ over [lo, hi] starting from t.
double refine_distance(const BezierCurve& curve, const Vec3& r, double t, double lo, double hi) {
  double best = norm(evaluate(curve, t) - r);
  for (int it = 0; it < 20; ++it) {
    const Vec3 d = evaluate(curve, t) - r;
    const Vec3 d1 = derivative(curve, t);
    const double f1 = dot(d, d1);
    const double f2 = dot(d1, d1) + dot(d, second_derivative(curve, t));
    if (!(f2 > 0.0)) break;
    const double next = std::clamp(t - f1 / f2, lo, hi);
    const double dist = norm(evaluate(curve, next) - r);
    if (dist < best) best = dist;
    if (std::abs(next - t) < 1e-15) break;
    t = next;
  }
  return best;
}

}  // namespace

CurveError curve_error(const BezierCurve& curve, const PointCloud& reference) {
  if (reference.empty()) throw ContractError("curve_error: empty reference");
  const PointCloud samples = sample_curve(curve, kErrorSamples);
  const double step = 1.0 / static_cast<double>(kErrorSamples - 1);
  CurveError err;
  for (const Vec3& r : reference) {
    std::size_t nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < samples.size(); ++j) {
      const double d = norm(r - samples[j]);
      if (d < best) {
        best = d;
        nearest = j;
      }
    }
    const double t = static_cast<double>(nearest) * step;
    best = std::min(best, refine_distance(curve, r, std::min(t, 1.0), std::max(0.0, t - step),
                                          std::min(1.0, t + step)));
    err.mean += best;
    err.max = std::max(err.max, best);
  }
  err.mean /= static_cast<double>(reference.size());
  return err;
}

std::string to_csv_row(const BezierCurve& curve) {
  std::string row;
  for (std::size_t i = 0; i <= kDegree; ++i) {
    for (std::size_t a = 0; a < 3; ++a) {
      if (!row.empty()) row += ',';
      row += format_real(curve.control[i][a]);
    }
  }
  return row;
}

BezierCurve from_csv_row(const std::string& row) {
  std::vector<double> values;
  std::stringstream ss(row);
  std::string field;
  while (std::getline(ss, field, ',')) values.push_back(parse_real(field));
  if (values.size() != 3 * (kDegree + 1)) {
    throw ParseError("bezier CSV row has " + std::to_string(values.size()) + " values, expected 15");
  }
  BezierCurve curve;
  for (std::size_t i = 0; i < values.size(); ++i) curve.control[i / 3][i % 3] = values[i];
  return curve;
}

}  // namespace stnet::bezier
