#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "stnet/tensor.hpp"

namespace stnet {

using Vec3 = std::array<double, 3>;
/// Ordered 3D points (n×3), in robot length units.
using PointCloud = std::vector<Vec3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline Vec3 normalized(const Vec3& a) { return (1.0 / norm(a)) * a; }

/// n×3 tensor <-> point list.
Tensor to_tensor(const PointCloud& points);
PointCloud to_points(const Tensor& t);

}  // namespace stnet
