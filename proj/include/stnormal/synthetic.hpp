// SPDX-FileCopyrightText: 2026 stnormal contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "stnormal/types.hpp"

namespace stnormal {

enum class Shape { kPlane, kBox, kSphere };

/// A sampled surface. `rotation` columns are the body axes in the world frame;
/// for a plane the third column is its normal. `extent` holds (width, height, -)
/// for planes, edge lengths for boxes and (radius, -, -) for spheres.
struct Primitive {
  Shape shape = Shape::kPlane;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d extent = Eigen::Vector3d::Ones();

  double area() const;
};

/// Plane patch with the given unit normal; the in-plane axes are chosen deterministically.
Primitive make_plane(const Eigen::Vector3d& center, const Eigen::Vector3d& normal, double width,
                     double height);
Primitive make_box(const Eigen::Vector3d& center, const Eigen::Vector3d& size,
                   const Eigen::Matrix3d& rotation = Eigen::Matrix3d::Identity());
Primitive make_sphere(const Eigen::Vector3d& center, double radius);

struct Waypoint {
  double time = 0.0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
};

/// Translation-only motion: constant velocity from the primitive's center at
/// t = 0, or piecewise-linear through absolute waypoints (held at the ends).
struct Motion {
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  std::vector<Waypoint> waypoints;

  Eigen::Vector3d center_at(const Eigen::Vector3d& initial_center, double t) const;
  Eigen::Vector3d velocity_at(double t) const;
};

struct SceneObject {
  std::string name;
  Primitive primitive;
  bool moving = false;
  Motion motion;
};

struct SensorSpec {
  double frame_rate = 10.0;
  std::size_t frames = 40;
  std::size_t points_per_frame = 20000;
  double noise_sigma = 0.0;  // isotropic Gaussian position noise, meters
  // Per-point time offsets are uniform in +-0.5 * time_jitter / frame_rate.
  double time_jitter = 1.0;
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  std::uint64_t seed = 1;
  // 0 samples surfaces uniformly by area. A positive r0 makes the sample
  // density fall off like a spinning lidar's, proportional to 1 / max(r, r0)^2
  // with r the distance from `origin` at t = 0.
  double range_falloff = 0.0;
};

struct SceneSpec {
  std::vector<SceneObject> objects;
  SensorSpec sensor;

  /// Throws ConfigError on an empty scene or invalid sensor settings.
  void validate() const;
};

/// Scene files use the flat key = value format. Sensor keys: frame_rate, frames,
/// points_per_frame, noise, time_jitter, sensor_origin, seed, range_falloff. Objects:
///   static.<name> = plane center=x,y,z normal=x,y,z size=w,h
///   mover.<name>  = box center=x,y,z size=sx,sy,sz [rpy=r,p,y] velocity=vx,vy,vz
///   mover.<name>  = sphere radius=r waypoints=t:x,y,z;t:x,y,z
/// Angles are in degrees.
SceneSpec parse_scene(std::string_view text, std::string_view source = "<scene>");
SceneSpec load_scene(const std::filesystem::path& path);

struct LabeledCloud {
  Cloud cloud;
  std::vector<Label> labels;
  std::vector<Eigen::Vector3d> velocities;
};

/// Deterministic generator. Every surface gets a fixed body-frame sample set
/// (drawn once from the seed, sized by its share of the budget); frame k
/// places each sample at its object's pose at the sample's own jittered time.
class SceneGenerator {
 public:
  /// Throws ConfigError on an invalid spec or when the point budget leaves an
  /// object without samples.
  explicit SceneGenerator(SceneSpec spec);

  const SceneSpec& spec() const { return spec_; }
  std::size_t frame_count() const { return spec_.sensor.frames; }
  double frame_stamp(std::size_t k) const;

  LabeledCloud frame(std::size_t k) const;

 private:
  SceneSpec spec_;
  std::vector<std::vector<Eigen::Vector3d>> samples_;  // body frame, per object
};

std::vector<LabeledCloud> generate(const SceneSpec& spec);

/// Expected dynamic score of a plane with unit `normal` translating at `velocity`:
/// |n.v| / sqrt(1 + (n.v)^2). Throws std::invalid_argument if | ||n|| - 1 | > 1e-9.
double moving_plane_oracle(const Eigen::Vector3d& normal, const Eigen::Vector3d& velocity);

}  // namespace stnormal
