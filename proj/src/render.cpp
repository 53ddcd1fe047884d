#include "stnet/render.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stnet/errors.hpp"
#include "stnet/rng.hpp"

namespace stnet::render {

Camera Camera::look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double fx, double fy,
                       std::size_t height, std::size_t width) {
  const Vec3 forward = normalized(target - eye);
  const Vec3 right = normalized(cross(forward, up));
  const Vec3 down = cross(forward, right);
  Camera cam;
  cam.fx = fx;
  cam.fy = fy;
  cam.cx = static_cast<double>(width) / 2.0;
  cam.cy = static_cast<double>(height) / 2.0;
  cam.rotation = {right[0],   right[1],   right[2],   down[0],   down[1],
                  down[2],    forward[0], forward[1], forward[2]};
  cam.translation = {-dot(right, eye), -dot(down, eye), -dot(forward, eye)};
  cam.height = height;
  cam.width = width;
  return cam;
}

Vec3 Camera::to_camera(const Vec3& p) const {
  const auto& r = rotation;
  return {r[0] * p[0] + r[1] * p[1] + r[2] * p[2] + translation[0],
          r[3] * p[0] + r[4] * p[1] + r[5] * p[2] + translation[1],
          r[6] * p[0] + r[7] * p[1] + r[8] * p[2] + translation[2]};
}

Camera default_camera(const sim::RobotSpec& spec, std::size_t height, std::size_t width) {
  const double elevation = 20.0 * std::numbers::pi / 180.0;
  const double distance = 3.0 * spec.length;
  const Vec3 target{0.0, 0.0, 0.45 * spec.length};
  const Vec3 eye = target + Vec3{0.0, -distance * std::cos(elevation), distance * std::sin(elevation)};
  const double focal = 1.6 * static_cast<double>(std::min(height, width));
  return Camera::look_at(eye, target, {0.0, 0.0, 1.0}, focal, focal, height, width);
}

void RenderOptions::validate() const {
  if (stroke_radius < 1.0 || marker_radius < 1.0) {
    throw ContractError("render: stroke and marker radii must be >= 1 pixel");
  }
  if (noise_sigma < 0.0) throw ContractError("render: noise sigma must be >= 0");
}

RenderOptions default_options(std::size_t height, std::size_t width) {
  RenderOptions opts;
  const double scale = std::max(1.0, static_cast<double>(std::min(height, width)) / 64.0);
  opts.stroke_radius *= scale;
  opts.marker_radius *= scale;
  return opts;
}

Pixel project(const Vec3& point, const Camera& cam) {
  const Vec3 c = cam.to_camera(point);
  if (!(c[2] > 0.0)) {
    throw ProjectionError("project: point has non-positive depth " + std::to_string(c[2]));
  }
  return {cam.fx * c[0] / c[2] + cam.cx, cam.fy * c[1] / c[2] + cam.cy};
}

namespace {

double segment_distance(double px, double py, const Pixel& a, const Pixel& b) {
  const double dx = b.u - a.u;
  const double dy = b.v - a.v;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((px - a.u) * dx + (py - a.v) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(px - (a.u + t * dx), py - (a.v + t * dy));
}

// Coverage of a pixel by a shape at distance d from its centre: 1 inside, linear
// ramp over one pixel at the edge.
double coverage(double radius, double d) { return std::clamp(radius + 0.5 - d, 0.0, 1.0); }

struct Box {
  long x0, x1, y0, y1;
};

Box pixel_box(double u0, double u1, double v0, double v1, double pad, std::size_t w, std::size_t h) {
  return {std::max(0L, static_cast<long>(std::floor(u0 - pad))),
          std::min(static_cast<long>(w) - 1, static_cast<long>(std::ceil(u1 + pad))),
          std::max(0L, static_cast<long>(std::floor(v0 - pad))),
          std::min(static_cast<long>(h) - 1, static_cast<long>(std::ceil(v1 + pad)))};
}

std::vector<Pixel> project_all(const PointCloud& points, const Camera& cam, const char* what) {
  std::vector<Pixel> out;
  out.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    try {
      out.push_back(project(points[i], cam));
    } catch (const ProjectionError& e) {
      throw ProjectionError(std::string("render: ") + what + " sample " + std::to_string(i) +
                            " cannot be projected (" + e.what() + ")");
    }
  }
  return out;
}

}  // namespace

Tensor render(const PointCloud& markers, const PointCloud& backbone, const Camera& cam,
              const RenderOptions& opts) {
  opts.validate();
  const std::size_t h = cam.height;
  const std::size_t w = cam.width;
  const std::vector<Pixel> stroke_px = project_all(backbone, cam, "backbone");
  const std::vector<Pixel> marker_px = project_all(markers, cam, "marker");

  std::vector<double> stroke_cov(h * w, 0.0);
  auto cover_segment = [&](const Pixel& a, const Pixel& b) {
    const Box box = pixel_box(std::min(a.u, b.u), std::max(a.u, b.u), std::min(a.v, b.v),
                              std::max(a.v, b.v), opts.stroke_radius + 1.0, w, h);
    for (long y = box.y0; y <= box.y1; ++y) {
      for (long x = box.x0; x <= box.x1; ++x) {
        const double d = segment_distance(x + 0.5, y + 0.5, a, b);
        double& c = stroke_cov[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)];
        c = std::max(c, coverage(opts.stroke_radius, d));
      }
    }
  };
  if (stroke_px.size() == 1) cover_segment(stroke_px[0], stroke_px[0]);
  for (std::size_t i = 1; i < stroke_px.size(); ++i) cover_segment(stroke_px[i - 1], stroke_px[i]);

  std::vector<double> marker_cov(h * w, 0.0);
  for (const Pixel& m : marker_px) {
    const Box box = pixel_box(m.u, m.u, m.v, m.v, opts.marker_radius + 1.0, w, h);
    for (long y = box.y0; y <= box.y1; ++y) {
      for (long x = box.x0; x <= box.x1; ++x) {
        const double d = std::hypot(x + 0.5 - m.u, y + 0.5 - m.v);
        double& c = marker_cov[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)];
        c = std::max(c, coverage(opts.marker_radius, d));
      }
    }
  }

  Tensor image({h, w, 3});
  Rng noise(opts.seed);
  for (std::size_t p = 0; p < h * w; ++p) {
    for (std::size_t ch = 0; ch < 3; ++ch) {
      double v = opts.background[ch] * (1.0 - stroke_cov[p]) + opts.stroke[ch] * stroke_cov[p];
      v = v * (1.0 - marker_cov[p]) + opts.marker[ch] * marker_cov[p];
      v *= opts.gain;
      if (opts.noise_sigma > 0.0) v += opts.noise_sigma * noise.normal();
      image[p * 3 + ch] = std::clamp(v, 0.0, 1.0);
    }
  }
  return image;
}

nlohmann::json to_json(const Camera& cam) {
  return {{"fx", cam.fx},
          {"fy", cam.fy},
          {"cx", cam.cx},
          {"cy", cam.cy},
          {"rotation", cam.rotation},
          {"translation", cam.translation},
          {"height", cam.height},
          {"width", cam.width}};
}

Camera camera_from_json(const nlohmann::json& j) {
  Camera cam;
  cam.fx = j.at("fx").get<double>();
  cam.fy = j.at("fy").get<double>();
  cam.cx = j.at("cx").get<double>();
  cam.cy = j.at("cy").get<double>();
  cam.rotation = j.at("rotation").get<std::array<double, 9>>();
  cam.translation = j.at("translation").get<Vec3>();
  cam.height = j.at("height").get<std::size_t>();
  cam.width = j.at("width").get<std::size_t>();
  return cam;
}

nlohmann::json to_json(const RenderOptions& opts) {
  return {{"stroke_radius", opts.stroke_radius},
          {"marker_radius", opts.marker_radius},
          {"background", opts.background},
          {"stroke", opts.stroke},
          {"marker", opts.marker},
          {"gain", opts.gain},
          {"noise_sigma", opts.noise_sigma},
          {"seed", opts.seed}};
}

RenderOptions options_from_json(const nlohmann::json& j) {
  RenderOptions opts;
  opts.stroke_radius = j.at("stroke_radius").get<double>();
  opts.marker_radius = j.at("marker_radius").get<double>();
  opts.background = j.at("background").get<Rgb>();
  opts.stroke = j.at("stroke").get<Rgb>();
  opts.marker = j.at("marker").get<Rgb>();
  opts.gain = j.at("gain").get<double>();
  opts.noise_sigma = j.at("noise_sigma").get<double>();
  opts.seed = j.at("seed").get<std::uint64_t>();
  opts.validate();
  return opts;
}

}  // namespace stnet::render
