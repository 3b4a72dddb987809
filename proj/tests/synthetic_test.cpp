// SPDX-FileCopyrightText: 2026 stnormal contributors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cstring>
#include <random>

#include "stnormal/error.hpp"
#include "stnormal/synthetic.hpp"
#include "support.hpp"

using namespace stnormal;

namespace {

double direct_oracle(double a) { return std::abs(a) / std::sqrt(1.0 + a * a); }

bool bit_identical(const LabeledCloud& a, const LabeledCloud& b) {
  if (a.cloud.points.size() != b.cloud.points.size()) return false;
  return std::memcmp(a.cloud.points.data(), b.cloud.points.data(),
                     a.cloud.points.size() * sizeof(TimedPoint)) == 0 &&
         a.labels == b.labels && a.cloud.stamp == b.cloud.stamp;
}

}  // namespace

TEST_CASE("moving plane oracle examples") {
  const Eigen::Vector3d z = Eigen::Vector3d::UnitZ();
  CHECK(moving_plane_oracle(z, Eigen::Vector3d::Zero()) == 0.0);
  CHECK(moving_plane_oracle(z, {1.0, 0.0, 0.0}) == 0.0);
  CHECK(moving_plane_oracle(z, {0.0, 0.0, 1.0}) == doctest::Approx(0.70710678).epsilon(1e-8));
  CHECK(moving_plane_oracle(z, {0.0, 0.0, -0.5}) == doctest::Approx(0.4472136).epsilon(1e-7));
}

TEST_CASE("moving plane oracle is bounded and grows with normal speed") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> speed(-50.0, 50.0);
  for (int trial = 0; trial < 500; ++trial) {
    const Eigen::Vector3d n = test::random_unit(rng);
    const Eigen::Vector3d v(speed(rng), speed(rng), speed(rng));
    const double s = moving_plane_oracle(n, v);
    CHECK(s >= 0.0);
    CHECK(s < 1.0);
    CHECK(s == doctest::Approx(direct_oracle(n.dot(v))).epsilon(1e-12));
  }
  double last = -1.0;
  for (double a = 0.0; a <= 20.0; a += 0.125) {
    const double s = moving_plane_oracle(Eigen::Vector3d::UnitX(), {a, 0, 0});
    CHECK(s > last);
    last = s;
  }
}

TEST_CASE("moving plane oracle rejects non-unit normals") {
  CHECK_THROWS_AS(moving_plane_oracle({0, 0, 2}, {0, 0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(moving_plane_oracle({0, 0, 1.0 + 1e-6}, {0, 0, 1}), std::invalid_argument);
  CHECK_NOTHROW(moving_plane_oracle({0, 0, 1.0 + 1e-12}, {0, 0, 1}));
}

TEST_CASE("a static plane yields static labels and zero velocities") {
  const auto frames = generate(test::static_plane_scene(3, 1000));
  REQUIRE(frames.size() == 3);
  for (const auto& f : frames) {
    CHECK(f.cloud.size() == 1000);
    CHECK(f.labels.size() == 1000);
    for (std::size_t i = 0; i < f.labels.size(); ++i) {
      CHECK(f.labels[i] == Label::kStatic);
      CHECK(f.velocities[i].isZero(0.0));
      CHECK(f.cloud.points[i].z == 0.0);
    }
  }
  // Identical samples every frame when there is no jitter or noise.
  for (std::size_t i = 0; i < 1000; ++i) {
    CHECK(frames[0].cloud.points[i].xyz() == frames[2].cloud.points[i].xyz());
  }
}

TEST_CASE("movers are labeled dynamic and displaced by their velocity") {
  const Eigen::Vector3d v(0.3, -0.2, 0.1);
  const auto frames = generate(test::moving_plane_scene(Eigen::Vector3d::UnitZ(), v, 0.0, 2, 2.0,
                                                        500, 4));
  for (const auto& f : frames) {
    for (std::size_t i = 0; i < f.labels.size(); ++i) {
      CHECK(f.labels[i] == Label::kDynamic);
      CHECK(f.velocities[i] == v);
      // The plane passes through the origin at t = 0 and moves along z at 0.1 m/s.
      CHECK(f.cloud.points[i].z == doctest::Approx(0.1 * f.cloud.points[i].t).epsilon(1e-12));
    }
  }
}

TEST_CASE("per-point times lie within half a jittered period of the stamp") {
  SceneSpec spec = test::moving_plane_scene(Eigen::Vector3d::UnitX(), {1, 0, 0}, 0.0, 3, 2.0, 400, 5);
  spec.sensor.time_jitter = 0.5;
  const auto frames = generate(spec);
  for (std::size_t k = 0; k < frames.size(); ++k) {
    CHECK(frames[k].cloud.stamp == doctest::Approx(0.1 * static_cast<double>(k)));
    for (const auto& p : frames[k].cloud.points) {
      CHECK(std::abs(p.t - 0.1 * static_cast<double>(k)) <= 0.025 + 1e-12);
    }
  }
}

TEST_CASE("the same seed gives bit-identical clouds") {
  const SceneSpec spec = load_scene(test::source_dir() / "scenes/moving_box.scene");
  SceneSpec small = spec;
  small.sensor.frames = 3;
  small.sensor.points_per_frame = 5000;
  const auto a = generate(small);
  const auto b = generate(small);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(bit_identical(a[k], b[k]));

  small.sensor.seed += 1;
  const auto c = generate(small);
  CHECK_FALSE(bit_identical(a[0], c[0]));

  const SceneGenerator generator(small);
  CHECK(bit_identical(generator.frame(2), c[2]));
}

TEST_CASE("waypoint motion interpolates linearly and holds at the ends") {
  Motion m;
  m.waypoints = {{0.0, {0, 0, 0}}, {1.0, {2, 0, 0}}, {2.0, {2, 2, 0}}};
  const Eigen::Vector3d c0(5, 5, 5);
  CHECK(m.center_at(c0, 0.5).isApprox(Eigen::Vector3d(1, 0, 0)));
  CHECK(m.center_at(c0, 1.5).isApprox(Eigen::Vector3d(2, 1, 0)));
  CHECK(m.center_at(c0, -1.0).isApprox(Eigen::Vector3d(0, 0, 0)));
  CHECK(m.center_at(c0, 9.0).isApprox(Eigen::Vector3d(2, 2, 0)));
  CHECK(m.velocity_at(0.5).isApprox(Eigen::Vector3d(2, 0, 0)));
  CHECK(m.velocity_at(9.0).isZero(0.0));

  Motion constant;
  constant.velocity = {1, 2, 3};
  CHECK(constant.center_at(c0, 2.0).isApprox(Eigen::Vector3d(7, 9, 11)));
}

TEST_CASE("scene text parses objects and sensor keys") {
  const SceneSpec spec = parse_scene(R"(
# comment
frame_rate = 20
frames = 7
points_per_frame = 900
noise = 0.01
time_jitter = 0.5
sensor_origin = 1,2,3
seed = 99
static.floor = plane center=0,0,0 normal=0,0,2 size=4,4
mover.cube = box center=1,1,1 size=1,1,1 rpy=0,0,90 velocity=1,0,0
mover.ball = sphere center=0,0,1 radius=0.5 waypoints=0:0,0,1;1:1,0,1
)");
  CHECK(spec.sensor.frame_rate == 20.0);
  CHECK(spec.sensor.frames == 7);
  CHECK(spec.sensor.points_per_frame == 900);
  CHECK(spec.sensor.noise_sigma == 0.01);
  CHECK(spec.sensor.time_jitter == 0.5);
  CHECK(spec.sensor.origin == Eigen::Vector3d(1, 2, 3));
  CHECK(spec.sensor.seed == 99);
  REQUIRE(spec.objects.size() == 3);
  CHECK(spec.objects[0].name == "floor");
  CHECK_FALSE(spec.objects[0].moving);
  CHECK(spec.objects[1].primitive.shape == Shape::kBox);
  CHECK(spec.objects[1].moving);
  CHECK(spec.objects[1].motion.velocity == Eigen::Vector3d(1, 0, 0));
  CHECK((spec.objects[1].primitive.rotation * Eigen::Vector3d::UnitX())
            .isApprox(Eigen::Vector3d::UnitY(), 1e-12));
  CHECK(spec.objects[2].motion.waypoints.size() == 2);
  CHECK(generate(spec).size() == 7);
}

TEST_CASE("malformed scenes are rejected") {
  const auto bad = [](const char* text) {
    CHECK_THROWS_AS(parse_scene(text), ConfigError);
  };
  bad("");
  bad("frames = 3\n");
  bad("static.a = cone center=0,0,0\n");
  bad("static.a = plane center=0,0 normal=0,0,1 size=1,1\n");
  bad("static.a = plane center=0,0,0 normal=0,0,0 size=1,1\n");
  bad("static.a = plane center=0,0,0 normal=0,0,1 size=1,1 colour=red\n");
  bad("mover.a = sphere center=0,0,0 radius=1\n");
  bad("mover.a = sphere center=0,0,0 radius=1 velocity=1,0,0 waypoints=0:0,0,0;1:1,0,0\n");
  bad("mover.a = sphere center=0,0,0 radius=1 waypoints=1:0,0,0;0:1,0,0\n");
  bad("bogus = 1\nstatic.a = sphere center=0,0,0 radius=1\n");
  bad("time_jitter = 2\nstatic.a = sphere center=0,0,0 radius=1\n");
  CHECK_THROWS_AS(load_scene("/nonexistent/scene.scene"), IoError);
}

TEST_CASE("a budget too small for every object is a config error") {
  SceneSpec spec = parse_scene(
      "static.big = plane center=0,0,0 normal=0,0,1 size=100,100\n"
      "static.tiny = sphere center=0,0,1 radius=0.01\n");
  spec.sensor.points_per_frame = 10;
  CHECK_THROWS_AS(SceneGenerator{spec}, ConfigError);
}

TEST_CASE("bundled scenes parse") {
  const auto dir = test::source_dir() / "scenes";
  const SceneSpec box = load_scene(dir / "moving_box.scene");
  CHECK(box.sensor.frames == 40);
  CHECK(box.sensor.frame_rate == 10.0);
  std::size_t movers = 0;
  for (const auto& o : box.objects) movers += o.moving;
  CHECK(movers == 1);

  const SceneSpec room = load_scene(dir / "static_room.scene");
  for (const auto& o : room.objects) CHECK_FALSE(o.moving);

  const SceneSpec bench = load_scene(dir / "bench_131k.scene");
  CHECK(bench.sensor.points_per_frame >= 131072);
}
