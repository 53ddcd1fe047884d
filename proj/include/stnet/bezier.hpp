#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "stnet/geometry.hpp"

namespace stnet::bezier {

inline constexpr std::size_t kDegree = 4;

/// Degree-4 curve; control[0] is the fixed robot base.
struct BezierCurve {
  std::array<Vec3, kDegree + 1> control{};
};

/// C(4,i)(1−t)^{4−i} t^i for i = 0..4.
std::array<double, kDegree + 1> bernstein(double t);

/// B(t). Throws ContractError for t outside [0,1].
Vec3 evaluate(const BezierCurve& curve, double t);

/// Normalised cumulative chord length, measured from the first point (t_1 = 0, t_N = 1).
/// Throws DegenerateInputError when the total length is zero.
std::vector<double> chord_params(const PointCloud& points);
/// Same, measured from `base`, which is prepended and not returned: t_k is the chord
/// length base→p_1→…→p_k over the total.
std::vector<double> chord_params(const PointCloud& points, const Vec3& base);

/// Least-squares fit of control[1..4] with control[0] = base, minimising
/// J = Σ_k ‖P_k − B(t_k)‖². Closed form through the 4×4 normal equations of the
/// Bernstein design matrix, solved per axis. Throws SingularityError when fewer
/// than four distinct parameters are given or the system is numerically singular.
BezierCurve fit(const PointCloud& points, std::span<const double> params, const Vec3& base);

/// J for given parameters.
double objective(const BezierCurve& curve, const PointCloud& points, std::span<const double> params);

/// m ≥ 2 evaluations at t = j/(m−1).
PointCloud sample_curve(const BezierCurve& curve, std::size_t m);

struct CurveError {
  double mean = 0.0;
  double max = 0.0;
};

inline constexpr std::size_t kErrorSamples = 200;

/// First and second derivatives with respect to t.
Vec3 derivative(const BezierCurve& curve, double t);
Vec3 second_derivative(const BezierCurve& curve, double t);

/// For each reference point, distance to the closest curve point: the nearest of
/// 200 uniform samples, refined by Newton's method on t between its neighbours.
CurveError curve_error(const BezierCurve& curve, const PointCloud& reference);

/// 15 comma-separated reals: p0x,p0y,p0z,...,p4z.
std::string to_csv_row(const BezierCurve& curve);
BezierCurve from_csv_row(const std::string& row);

}  // namespace stnet::bezier
