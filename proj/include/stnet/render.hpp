#pragma once

#include <array>
#include <cstdint>

#include <json.hpp>

#include "stnet/geometry.hpp"
#include "stnet/sim.hpp"
#include "stnet/tensor.hpp"

namespace stnet::render {

using Rgb = std::array<double, 3>;

/// Pinhole camera. rotation is row-major world→camera; camera axes are
/// x right, y down, z forward.
struct Camera {
  double fx = 100.0;
  double fy = 100.0;
  double cx = 32.0;
  double cy = 32.0;
  std::array<double, 9> rotation{1, 0, 0, 0, 1, 0, 0, 0, 1};
  Vec3 translation{0.0, 0.0, 0.0};
  std::size_t height = 64;
  std::size_t width = 64;

  static Camera look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double fx, double fy,
                        std::size_t height, std::size_t width);
  Vec3 to_camera(const Vec3& p) const;
};

/// Side-on view from 3L away, lifted 20° above the horizontal, aimed at mid-height.
Camera default_camera(const sim::RobotSpec& spec, std::size_t height, std::size_t width);

struct RenderOptions {
  double stroke_radius = 1.0;
  double marker_radius = 1.6;
  Rgb background{0.08, 0.08, 0.10};
  Rgb stroke{0.85, 0.85, 0.80};
  Rgb marker{0.95, 0.20, 0.10};
  double gain = 1.0;
  double noise_sigma = 0.01;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Defaults scaled to an image size (radii grow with min(H, W)/64).
RenderOptions default_options(std::size_t height, std::size_t width);

struct Pixel {
  double u = 0.0;
  double v = 0.0;
};

/// u = fx·X/Z + cx, v = fy·Y/Z + cy. Throws ProjectionError for Z <= 0.
Pixel project(const Vec3& point, const Camera& cam);

/// H×W×3 image in [0,1]: anti-aliased backbone polyline, marker disks on top,
/// illumination gain, seeded Gaussian noise, clamped.
Tensor render(const PointCloud& markers, const PointCloud& backbone, const Camera& cam,
              const RenderOptions& opts);

nlohmann::json to_json(const Camera& cam);
Camera camera_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RenderOptions& opts);
RenderOptions options_from_json(const nlohmann::json& j);

}  // namespace stnet::render
