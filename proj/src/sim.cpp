#include "stnet/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stnet/errors.hpp"
#include "stnet/rng.hpp"

namespace stnet {

Tensor to_tensor(const PointCloud& points) {
  Tensor t({points.size(), 3});
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t a = 0; a < 3; ++a) t[i * 3 + a] = points[i][a];
  }
  return t;
}

PointCloud to_points(const Tensor& t) {
  if (t.size() % 3 != 0) throw DimensionError("to_points: size is not a multiple of 3");
  PointCloud points(t.size() / 3);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t a = 0; a < 3; ++a) points[i][a] = t[i * 3 + a];
  }
  return points;
}

}  // namespace stnet

namespace stnet::sim {

void RobotSpec::validate() const {
  if (!(length > 0.0)) throw ContractError("robot length must be positive");
  if (!(pitch_radius > 0.0)) throw ContractError("tendon pitch radius must be positive");
  if (!(load_compliance >= 0.0)) throw ContractError("load compliance must be non-negative");
  if (marker_arc.size() < 2) throw ContractError("at least two markers are required");
  double prev = 0.0;
  for (double s : marker_arc) {
    if (!(s > prev) || s > length) {
      throw ContractError("marker arc positions must satisfy 0 < s_1 < ... < s_n <= L");
    }
    prev = s;
  }
}

RobotSpec uniform_markers(std::size_t n, double length) {
  RobotSpec spec;
  spec.length = length;
  spec.marker_arc.clear();
  for (std::size_t i = 1; i <= n; ++i) {
    spec.marker_arc.push_back(length * static_cast<double>(i) / static_cast<double>(n));
  }
  spec.validate();
  return spec;
}

std::string to_string(LoadCondition c) {
  switch (c) {
    case LoadCondition::None:
      return "none";
    case LoadCondition::Fe1:
      return "Fe1";
    case LoadCondition::Fe2:
      return "Fe2";
    case LoadCondition::Fe3:
      return "Fe3";
  }
  return "none";
}

LoadCondition parse_load(const std::string& label) {
  for (LoadCondition c : kAllLoads) {
    if (to_string(c) == label) return c;
  }
  throw ParseError("unknown load label '" + label + "'");
}

ExternalLoad load_for(LoadCondition c, double magnitude) {
  switch (c) {
    case LoadCondition::None:
      return {};
    case LoadCondition::Fe1:
      return {{magnitude, 0.0, 0.0}};
    case LoadCondition::Fe2:
      return {{0.0, magnitude, 0.0}};
    case LoadCondition::Fe3:
      return {{0.0, 0.0, -magnitude}};
  }
  return {};
}

ArcState tendon_to_arc(const TendonDisplacement& q, const RobotSpec& spec) {
  const double theta_x = (q[0] - q[2]) / (2.0 * spec.pitch_radius);
  const double theta_y = (q[1] - q[3]) / (2.0 * spec.pitch_radius);
  ArcState state;
  state.theta = std::min(std::hypot(theta_x, theta_y), kMaxBend);
  state.phi = state.theta == 0.0 ? 0.0 : std::atan2(theta_y, theta_x);
  state.curvature = state.theta / spec.length;
  return state;
}

Vec3 backbone_point(const ArcState& state, double s, const RobotSpec& spec) {
  if (!(s >= 0.0 && s <= spec.length)) {
    throw ContractError("backbone_point: arc length " + std::to_string(s) + " outside [0, " +
                        std::to_string(spec.length) + "]");
  }
  const double k = state.curvature;
  if (std::abs(k) < 1e-9) return {0.0, 0.0, s};
  const double radial = (1.0 - std::cos(k * s)) / k;
  return {radial * std::cos(state.phi), radial * std::sin(state.phi), std::sin(k * s) / k};
}

Vec3 backbone_tangent(const ArcState& state, double s) {
  const double a = state.curvature * s;
  return {std::sin(a) * std::cos(state.phi), std::sin(a) * std::sin(state.phi), std::cos(a)};
}

double deflection_profile(double s, double length) {
  return s * s * (3.0 * length - s) / (2.0 * length * length * length);
}

PointCloud apply_load(const PointCloud& points, const std::vector<double>& arc,
                      const ExternalLoad& load, const RobotSpec& spec, const Vec3& tangent_tip) {
  if (arc.size() != points.size()) {
    throw DimensionError("apply_load: " + std::to_string(points.size()) + " points but " +
                         std::to_string(arc.size()) + " arc positions");
  }
  const Vec3 perpendicular = load.force - dot(load.force, tangent_tip) * tangent_tip;
  PointCloud out = points;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const double w = deflection_profile(arc[k], spec.length);
    out[k] = points[k] + (spec.load_compliance * w) * perpendicular;
  }
  return out;
}

namespace {

PointCloud loaded_points(const TendonDisplacement& q, const ExternalLoad& load,
                         const RobotSpec& spec, const std::vector<double>& arc) {
  const ArcState state = tendon_to_arc(q, spec);
  PointCloud points;
  points.reserve(arc.size());
  for (double s : arc) points.push_back(backbone_point(state, s, spec));
  return apply_load(points, arc, load, spec, backbone_tangent(state, spec.length));
}

}  // namespace

PointCloud marker_positions(const TendonDisplacement& q, const ExternalLoad& load,
                            const RobotSpec& spec) {
  return loaded_points(q, load, spec, spec.marker_arc);
}

PointCloud backbone_samples(const TendonDisplacement& q, const ExternalLoad& load,
                            const RobotSpec& spec, std::size_t m) {
  if (m < 2) throw ContractError("backbone_samples: need at least two samples");
  std::vector<double> arc(m);
  for (std::size_t j = 0; j < m; ++j) {
    arc[j] = spec.length * static_cast<double>(j) / static_cast<double>(m - 1);
  }
  arc.back() = spec.length;
  return loaded_points(q, load, spec, arc);
}

std::vector<TrajectoryStep> trajectory(std::size_t cycles, std::size_t steps_per_cycle,
                                       std::uint64_t seed, const RobotSpec& spec,
                                       const ExternalLoad& load) {
  if (cycles < 1) throw ContractError("trajectory: cycles must be >= 1");
  if (steps_per_cycle < 1) throw ContractError("trajectory: steps_per_cycle must be >= 1");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  constexpr double petals = 3.0;
  Rng rng(seed);
  std::vector<TrajectoryStep> steps;
  steps.reserve(cycles * steps_per_cycle);
  for (std::size_t c = 0; c < cycles; ++c) {
    const double direction0 = rng.uniform(0.0, two_pi);
    const double petal_phase = rng.uniform(0.0, std::numbers::pi);
    const double amplitude = rng.uniform(0.85, 1.0);
    for (std::size_t k = 0; k < steps_per_cycle; ++k) {
      const double u = static_cast<double>(k) / static_cast<double>(steps_per_cycle);
      const double direction = direction0 + two_pi * u;
      const double lift = std::sin(std::numbers::pi * petals * u + petal_phase);
      const double bend = kMaxBend * amplitude * lift * lift;
      const double theta_x = bend * std::cos(direction);
      const double theta_y = bend * std::sin(direction);
      const double q1 = spec.pitch_radius * theta_x;
      const double q2 = spec.pitch_radius * theta_y;
      steps.push_back({{q1, q2, -q1, -q2}, load});
    }
  }
  return steps;
}

nlohmann::json to_json(const RobotSpec& spec) {
  return {{"length", spec.length},
          {"pitch_radius", spec.pitch_radius},
          {"load_compliance", spec.load_compliance},
          {"marker_arc", spec.marker_arc}};
}

RobotSpec robot_from_json(const nlohmann::json& j) {
  RobotSpec spec;
  spec.length = j.at("length").get<double>();
  spec.pitch_radius = j.at("pitch_radius").get<double>();
  spec.load_compliance = j.at("load_compliance").get<double>();
  spec.marker_arc = j.at("marker_arc").get<std::vector<double>>();
  spec.validate();
  return spec;
}

}  // namespace stnet::sim
