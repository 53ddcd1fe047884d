#include <gtest/gtest.h>

#include <cmath>

#include "stnet/errors.hpp"
#include "stnet/render.hpp"

using namespace stnet;
using namespace stnet::render;

TEST(Render, PinholeProjection) {
  Camera cam;  // identity pose, f = 100, centre (32, 32)
  const Pixel p = project({1.0, -2.0, 10.0}, cam);
  EXPECT_DOUBLE_EQ(p.u, 42.0);
  EXPECT_DOUBLE_EQ(p.v, 12.0);
  EXPECT_THROW(project({0.0, 0.0, -1.0}, cam), ProjectionError);
}

TEST(Render, DefaultCameraSeesTheWholeEnvelope) {
  const sim::RobotSpec spec;
  const Camera cam = default_camera(spec, 64, 64);
  for (double theta : {0.0, 0.5, 1.0}) {
    for (double phi = 0.0; phi < 6.3; phi += 0.7) {
      const double q1 = spec.pitch_radius * theta * std::cos(phi);
      const double q2 = spec.pitch_radius * theta * std::sin(phi);
      for (const Vec3& m : sim::marker_positions({q1, q2, -q1, -q2}, sim::load_for(sim::LoadCondition::Fe1), spec)) {
        const Pixel p = project(m, cam);
        EXPECT_GE(p.u, 0.0);
        EXPECT_LT(p.u, 64.0);
        EXPECT_GE(p.v, 0.0);
        EXPECT_LT(p.v, 64.0);
      }
    }
  }
}

TEST(Render, NoiselessImageShowsMarkersOverBackground) {
  const sim::RobotSpec spec;
  const Camera cam = default_camera(spec, 64, 64);
  RenderOptions opts = default_options(64, 64);
  opts.noise_sigma = 0.0;
  const PointCloud markers = sim::marker_positions({0, 0, 0, 0}, {}, spec);
  const PointCloud backbone = sim::backbone_samples({0, 0, 0, 0}, {}, spec, 64);
  const Tensor img = render::render(markers, backbone, cam, opts);
  EXPECT_EQ(img.shape(), (Shape{64, 64, 3}));
  EXPECT_DOUBLE_EQ(img.at(0, 0, 0), opts.background[0]);
  const Pixel tip = project(markers.back(), cam);
  const auto v = static_cast<std::size_t>(tip.v);
  const auto u = static_cast<std::size_t>(tip.u);
  EXPECT_NEAR(img.at(v, u, 0), opts.marker[0], 1e-12);
  EXPECT_NEAR(img.at(v, u, 1), opts.marker[1], 1e-12);
}

TEST(Render, NoiseIsSeededAndClamped) {
  const sim::RobotSpec spec;
  const Camera cam = default_camera(spec, 32, 32);
  RenderOptions opts = default_options(32, 32);
  opts.noise_sigma = 0.5;
  opts.seed = 11;
  const PointCloud markers = sim::marker_positions({1, 2, -1, -2}, {}, spec);
  const PointCloud backbone = sim::backbone_samples({1, 2, -1, -2}, {}, spec, 32);
  const Tensor a = render::render(markers, backbone, cam, opts);
  const Tensor b = render::render(markers, backbone, cam, opts);
  EXPECT_EQ(a, b);
  for (double v : a.values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  opts.seed = 12;
  EXPECT_NE(a, render::render(markers, backbone, cam, opts));
}

TEST(Render, InvalidOptions) {
  RenderOptions opts;
  opts.stroke_radius = 0.2;
  EXPECT_THROW(opts.validate(), ContractError);
}

TEST(Render, JsonRoundTrip) {
  const Camera cam = default_camera(sim::RobotSpec{}, 48, 64);
  const Camera r = camera_from_json(to_json(cam));
  EXPECT_EQ(r.rotation, cam.rotation);
  EXPECT_EQ(r.translation, cam.translation);
  EXPECT_EQ(r.fx, cam.fx);
  const RenderOptions o = options_from_json(to_json(default_options(48, 64)));
  EXPECT_EQ(o.marker_radius, default_options(48, 64).marker_radius);
}
