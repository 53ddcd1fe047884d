#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "stnet/geometry.hpp"

namespace stnet::sim {

/// Tendon lengths pulled by the four actuators; antagonistic pairs (1,3) and (2,4).
using TendonDisplacement = std::array<double, 4>;

inline constexpr double kMaxBend = 1.0471975511965976;  // π/3

struct RobotSpec {
  double length = 100.0;
  double pitch_radius = 5.0;
  /// Tip deflection per unit of perpendicular tip force.
  double load_compliance = 8.0;
  /// Arc positions s_1 < ... < s_n of the markers.
  std::vector<double> marker_arc{20.0, 40.0, 60.0, 80.0, 100.0};

  /// Throws ContractError when an invariant fails.
  void validate() const;
  std::size_t markers() const { return marker_arc.size(); }
};

/// Markers at s_i = i·L/n, i = 1..n.
RobotSpec uniform_markers(std::size_t n, double length = 100.0);

struct ArcState {
  double curvature = 0.0;
  double phi = 0.0;
  double theta = 0.0;
};

enum class LoadCondition { None, Fe1, Fe2, Fe3 };

std::string to_string(LoadCondition c);
LoadCondition parse_load(const std::string& label);
inline constexpr std::array<LoadCondition, 4> kAllLoads{LoadCondition::None, LoadCondition::Fe1,
                                                        LoadCondition::Fe2, LoadCondition::Fe3};

struct ExternalLoad {
  Vec3 force{0.0, 0.0, 0.0};
};

/// Fixed tip force of each loading condition: Fe1 lateral (+x), Fe2 toward the
/// camera's depth axis (+y), Fe3 downward (−z).
ExternalLoad load_for(LoadCondition c, double magnitude = 1.0);

ArcState tendon_to_arc(const TendonDisplacement& q, const RobotSpec& spec);
/// Unloaded constant-curvature backbone position at arc length s ∈ [0, L].
Vec3 backbone_point(const ArcState& state, double s, const RobotSpec& spec);
/// Unit tangent of the unloaded backbone at arc length s.
Vec3 backbone_tangent(const ArcState& state, double s);
/// Cantilever profile w(s) = s²(3L − s)/(2L³).
double deflection_profile(double s, double length);
/// Displaces point k (at arc length arc[k]) by c_load·w(s_k)·F⊥.
PointCloud apply_load(const PointCloud& points, const std::vector<double>& arc,
                      const ExternalLoad& load, const RobotSpec& spec, const Vec3& tangent_tip);

PointCloud marker_positions(const TendonDisplacement& q, const ExternalLoad& load,
                            const RobotSpec& spec);
/// m points at s = j·L/(m−1), loaded the same way as the markers.
PointCloud backbone_samples(const TendonDisplacement& q, const ExternalLoad& load,
                            const RobotSpec& spec, std::size_t m);

struct TrajectoryStep {
  TendonDisplacement q;
  ExternalLoad load;
};

/// Rosette sweep: the bending plane turns once per cycle while the bend angle
/// rises and falls three times, reaching at most 60°. Cycles differ by seeded
/// phase and amplitude jitter. q1 = −q3, q2 = −q4 throughout.
std::vector<TrajectoryStep> trajectory(std::size_t cycles, std::size_t steps_per_cycle,
                                       std::uint64_t seed, const RobotSpec& spec,
                                       const ExternalLoad& load = {});

nlohmann::json to_json(const RobotSpec& spec);
RobotSpec robot_from_json(const nlohmann::json& j);

}  // namespace stnet::sim
