// SPDX-FileCopyrightText: 2026 stnormal contributors
// SPDX-License-Identifier: Apache-2.0
#include "stnormal/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <Eigen/Geometry>

#include "stnormal/error.hpp"
#include "stnormal/key_value.hpp"

namespace stnormal {

namespace {

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

Eigen::VectorXd parse_vector(const std::string& text, int n, const std::string& what) {
  const auto parts = split(text, ',');
  if (static_cast<int>(parts.size()) != n) {
    throw ConfigError(what + ": expected " + std::to_string(n) + " comma-separated values, got '" +
                      text + "'");
  }
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = parse_number(parts[i], what);
  return v;
}

Eigen::Matrix3d rotation_from_rpy_degrees(const Eigen::Vector3d& rpy) {
  const Eigen::Vector3d r = rpy * std::numbers::pi / 180.0;
  return (Eigen::AngleAxisd(r.z(), Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(r.y(), Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(r.x(), Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

SceneObject parse_object(const std::string& name, const std::string& text, bool moving,
                         const std::string& where) {
  std::istringstream words(text);
  std::string kind;
  words >> kind;
  std::map<std::string, std::string> fields;
  std::string token;
  while (words >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key=value, got '" + token + "'");
    fields[token.substr(0, eq)] = token.substr(eq + 1);
  }
  auto take = [&](const std::string& key) -> std::optional<std::string> {
    const auto it = fields.find(key);
    if (it == fields.end()) return std::nullopt;
    std::string v = it->second;
    fields.erase(it);
    return v;
  };
  auto vec3 = [&](const std::string& key) -> std::optional<Eigen::Vector3d> {
    const auto v = take(key);
    if (!v) return std::nullopt;
    return Eigen::Vector3d(parse_vector(*v, 3, where + " " + key));
  };
  auto require3 = [&](const std::string& key) {
    const auto v = vec3(key);
    if (!v) throw ConfigError(where + ": missing '" + key + "'");
    return *v;
  };

  SceneObject object;
  object.name = name;
  object.moving = moving;

  std::optional<Eigen::Vector3d> center = vec3("center");
  const auto rpy = vec3("rpy");
  if (moving) {
    const auto velocity = vec3("velocity");
    const auto waypoints = take("waypoints");
    if (velocity && waypoints) throw ConfigError(where + ": give velocity or waypoints, not both");
    if (!velocity && !waypoints) throw ConfigError(where + ": mover needs velocity or waypoints");
    if (velocity) object.motion.velocity = *velocity;
    if (waypoints) {
      for (const auto& wp : split(*waypoints, ';')) {
        const auto colon = wp.find(':');
        if (colon == std::string::npos) throw ConfigError(where + ": waypoint must be t:x,y,z");
        object.motion.waypoints.push_back(
            {parse_number(wp.substr(0, colon), where + " waypoint time"),
             Eigen::Vector3d(parse_vector(wp.substr(colon + 1), 3, where + " waypoint"))});
      }
      auto& wps = object.motion.waypoints;
      for (std::size_t i = 1; i < wps.size(); ++i) {
        if (!(wps[i].time > wps[i - 1].time)) {
          throw ConfigError(where + ": waypoint times must increase");
        }
      }
      if (!center) center = wps.front().position;
    }
  }
  if (!center) throw ConfigError(where + ": missing 'center'");

  if (kind == "plane") {
    const Eigen::Vector3d normal = require3("normal");
    const auto size = take("size");
    if (!size) throw ConfigError(where + ": missing 'size'");
    const Eigen::Vector2d wh(parse_vector(*size, 2, where + " size"));
    if (normal.norm() == 0.0) throw ConfigError(where + ": zero normal");
    object.primitive = make_plane(*center, normal.normalized(), wh.x(), wh.y());
  } else if (kind == "box") {
    const Eigen::Vector3d size = require3("size");
    object.primitive = make_box(*center, size,
                                rpy ? rotation_from_rpy_degrees(*rpy) : Eigen::Matrix3d::Identity());
  } else if (kind == "sphere") {
    const auto radius = take("radius");
    if (!radius) throw ConfigError(where + ": missing 'radius'");
    object.primitive = make_sphere(*center, parse_number(*radius, where + " radius"));
  } else {
    throw ConfigError(where + ": unknown primitive '" + kind + "'");
  }
  if (!fields.empty()) throw ConfigError(where + ": unknown field '" + fields.begin()->first + "'");
  if (!(object.primitive.area() > 0.0)) throw ConfigError(where + ": primitive has zero area");
  return object;
}

Eigen::Vector3d sample_surface(const Primitive& prim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-0.5, 0.5);
  switch (prim.shape) {
    case Shape::kPlane:
      return {unit(rng) * prim.extent.x(), unit(rng) * prim.extent.y(), 0.0};
    case Shape::kBox: {
      const Eigen::Vector3d& s = prim.extent;
      const double faces[3] = {s.y() * s.z(), s.x() * s.z(), s.x() * s.y()};
      std::uniform_real_distribution<double> pick(0.0, faces[0] + faces[1] + faces[2]);
      const double u = pick(rng);
      const int axis = u < faces[0] ? 0 : (u < faces[0] + faces[1] ? 1 : 2);
      const double side = unit(rng) < 0.0 ? -0.5 : 0.5;
      Eigen::Vector3d p(unit(rng) * s.x(), unit(rng) * s.y(), unit(rng) * s.z());
      p[axis] = side * s[axis];
      return p;
    }
    case Shape::kSphere: {
      std::normal_distribution<double> gauss(0.0, 1.0);
      Eigen::Vector3d d;
      do {
        d = {gauss(rng), gauss(rng), gauss(rng)};
      } while (d.norm() < 1e-12);
      return prim.extent.x() * d.normalized();
    }
  }
  return Eigen::Vector3d::Zero();
}

}  // namespace

double Primitive::area() const {
  switch (shape) {
    case Shape::kPlane:
      return extent.x() * extent.y();
    case Shape::kBox:
      return 2.0 * (extent.x() * extent.y() + extent.y() * extent.z() + extent.x() * extent.z());
    case Shape::kSphere:
      return 4.0 * std::numbers::pi * extent.x() * extent.x();
  }
  return 0.0;
}

Primitive make_plane(const Eigen::Vector3d& center, const Eigen::Vector3d& normal, double width,
                     double height) {
  const Eigen::Vector3d n = normal.normalized();
  Eigen::Index axis = 0;
  n.cwiseAbs().minCoeff(&axis);
  const Eigen::Vector3d u = n.cross(Eigen::Vector3d::Unit(axis)).normalized();
  const Eigen::Vector3d w = n.cross(u);
  Primitive p;
  p.shape = Shape::kPlane;
  p.center = center;
  p.rotation.col(0) = u;
  p.rotation.col(1) = w;
  p.rotation.col(2) = n;
  p.extent = {width, height, 0.0};
  return p;
}

Primitive make_box(const Eigen::Vector3d& center, const Eigen::Vector3d& size,
                   const Eigen::Matrix3d& rotation) {
  Primitive p;
  p.shape = Shape::kBox;
  p.center = center;
  p.rotation = rotation;
  p.extent = size;
  return p;
}

Primitive make_sphere(const Eigen::Vector3d& center, double radius) {
  Primitive p;
  p.shape = Shape::kSphere;
  p.center = center;
  p.extent = {radius, 0.0, 0.0};
  return p;
}

Eigen::Vector3d Motion::center_at(const Eigen::Vector3d& initial_center, double t) const {
  if (waypoints.empty()) return initial_center + velocity * t;
  if (t <= waypoints.front().time) return waypoints.front().position;
  if (t >= waypoints.back().time) return waypoints.back().position;
  const auto upper = std::upper_bound(waypoints.begin(), waypoints.end(), t,
                                      [](double v, const Waypoint& w) { return v < w.time; });
  const auto& a = *std::prev(upper);
  const auto& b = *upper;
  const double alpha = (t - a.time) / (b.time - a.time);
  return (1.0 - alpha) * a.position + alpha * b.position;
}

Eigen::Vector3d Motion::velocity_at(double t) const {
  if (waypoints.empty()) return velocity;
  if (t < waypoints.front().time || t >= waypoints.back().time) return Eigen::Vector3d::Zero();
  const auto upper = std::upper_bound(waypoints.begin(), waypoints.end(), t,
                                      [](double v, const Waypoint& w) { return v < w.time; });
  const auto& a = *std::prev(upper);
  const auto& b = *upper;
  return (b.position - a.position) / (b.time - a.time);
}

void SceneSpec::validate() const {
  if (objects.empty()) throw ConfigError("scene has no objects");
  if (!(sensor.frame_rate > 0.0)) throw ConfigError("frame_rate must be > 0");
  if (sensor.frames < 1) throw ConfigError("frames must be >= 1");
  if (!(sensor.noise_sigma >= 0.0)) throw ConfigError("noise must be >= 0");
  if (!(sensor.time_jitter >= 0.0 && sensor.time_jitter <= 1.0)) {
    throw ConfigError("time_jitter must lie in [0, 1]");
  }
  if (!(sensor.range_falloff >= 0.0)) throw ConfigError("range_falloff must be >= 0");
}

SceneSpec parse_scene(std::string_view text, std::string_view source) {
  const KeyValueFile kv = KeyValueFile::parse(text, source);
  SceneSpec spec;
  auto& s = spec.sensor;
  auto count = [&](const std::string& key) {
    const long long v = *kv.get_int(key);
    if (v < 0) throw ConfigError(std::string(source) + ": " + key + " must be >= 0");
    return static_cast<std::size_t>(v);
  };
  for (const auto& [key, value] : kv.entries()) {
    const std::string where = std::string(source) + ": " + key;
    if (key == "frame_rate") {
      s.frame_rate = parse_number(value, where);
    } else if (key == "frames") {
      s.frames = count(key);
    } else if (key == "points_per_frame") {
      s.points_per_frame = count(key);
    } else if (key == "noise") {
      s.noise_sigma = parse_number(value, where);
    } else if (key == "time_jitter") {
      s.time_jitter = parse_number(value, where);
    } else if (key == "seed") {
      s.seed = static_cast<std::uint64_t>(*kv.get_int(key));
    } else if (key == "range_falloff") {
      s.range_falloff = parse_number(value, where);
    } else if (key == "sensor_origin") {
      s.origin = parse_vector(value, 3, where);
    } else if (key.starts_with("static.")) {
      spec.objects.push_back(parse_object(key.substr(7), value, false, where));
    } else if (key.starts_with("mover.")) {
      spec.objects.push_back(parse_object(key.substr(6), value, true, where));
    } else {
      throw ConfigError(where + ": unknown scene key");
    }
  }
  spec.validate();
  return spec;
}

SceneSpec load_scene(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open scene file");
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_scene(text, path.string());
}

SceneGenerator::SceneGenerator(SceneSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  const auto& objects = spec_.objects;
  const std::size_t budget = spec_.sensor.points_per_frame;

  const double r0 = spec_.sensor.range_falloff;
  auto density = [&](const SceneObject& o, const Eigen::Vector3d& local) {
    if (r0 <= 0.0) return 1.0;
    const double r = (o.primitive.center + o.primitive.rotation * local - spec_.sensor.origin).norm();
    return r <= r0 ? 1.0 : (r0 / r) * (r0 / r);
  };

  // Each object's share is its area times its mean relative density, the
  // latter estimated from a fixed pilot sample.
  std::vector<double> weights(objects.size());
  double total_weight = 0.0;
  {
    std::mt19937_64 pilot(spec_.sensor.seed ^ 0x9e3779b97f4a7c15ULL);
    constexpr int kPilot = 4096;
    for (std::size_t i = 0; i < objects.size(); ++i) {
      double mean = 1.0;
      if (r0 > 0.0) {
        mean = 0.0;
        for (int j = 0; j < kPilot; ++j) {
          mean += density(objects[i], sample_surface(objects[i].primitive, pilot));
        }
        mean /= kPilot;
      }
      weights[i] = objects[i].primitive.area() * mean;
      total_weight += weights[i];
    }
  }

  // Largest-remainder allocation of the point budget.
  std::vector<std::size_t> counts(objects.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const double share = static_cast<double>(budget) * weights[i] / total_weight;
    counts[i] = static_cast<std::size_t>(std::floor(share));
    assigned += counts[i];
    remainders.emplace_back(share - std::floor(share), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < budget && r < remainders.size(); ++r, ++assigned) {
    ++counts[remainders[r].second];
  }
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (counts[i] == 0) {
      throw ConfigError("points_per_frame " + std::to_string(budget) +
                        " too small: object '" + objects[i].name + "' receives no samples");
    }
  }

  std::mt19937_64 rng(spec_.sensor.seed);
  std::uniform_real_distribution<double> accept(0.0, 1.0);
  samples_.resize(objects.size());
  for (std::size_t i = 0; i < objects.size(); ++i) {
    samples_[i].reserve(counts[i]);
    while (samples_[i].size() < counts[i]) {
      const Eigen::Vector3d local = sample_surface(objects[i].primitive, rng);
      if (r0 > 0.0 && accept(rng) >= density(objects[i], local)) continue;
      samples_[i].push_back(local);
    }
  }
}

double SceneGenerator::frame_stamp(std::size_t k) const {
  return static_cast<double>(k) / spec_.sensor.frame_rate;
}

LabeledCloud SceneGenerator::frame(std::size_t k) const {
  const auto& sensor = spec_.sensor;
  std::seed_seq seq{static_cast<std::uint64_t>(sensor.seed), static_cast<std::uint64_t>(k),
                    std::uint64_t{0x5eed}};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> jitter(-0.5, 0.5);
  std::normal_distribution<double> noise(0.0, sensor.noise_sigma > 0.0 ? sensor.noise_sigma : 1.0);
  const double stamp = frame_stamp(k);
  const double jitter_span = sensor.time_jitter / sensor.frame_rate;

  LabeledCloud out;
  out.cloud.frame_index = static_cast<std::int64_t>(k);
  out.cloud.stamp = stamp;
  std::size_t total = 0;
  for (const auto& s : samples_) total += s.size();
  out.cloud.points.reserve(total);
  out.labels.reserve(total);
  out.velocities.reserve(total);

  for (std::size_t i = 0; i < spec_.objects.size(); ++i) {
    const auto& object = spec_.objects[i];
    const auto& prim = object.primitive;
    for (const auto& local : samples_[i]) {
      const double t = jitter_span > 0.0 ? stamp + jitter_span * jitter(rng) : stamp;
      Eigen::Vector3d center = prim.center;
      Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
      if (object.moving) {
        center = object.motion.center_at(prim.center, t);
        velocity = object.motion.velocity_at(t);
      }
      Eigen::Vector3d p = center + prim.rotation * local;
      if (sensor.noise_sigma > 0.0) p += Eigen::Vector3d(noise(rng), noise(rng), noise(rng));
      out.cloud.points.push_back({p.x(), p.y(), p.z(), t});
      out.labels.push_back(velocity.isZero(0.0) ? Label::kStatic : Label::kDynamic);
      out.velocities.push_back(velocity);
    }
  }
  return out;
}

std::vector<LabeledCloud> generate(const SceneSpec& spec) {
  const SceneGenerator generator(spec);
  std::vector<LabeledCloud> frames;
  frames.reserve(generator.frame_count());
  for (std::size_t k = 0; k < generator.frame_count(); ++k) frames.push_back(generator.frame(k));
  return frames;
}

double moving_plane_oracle(const Eigen::Vector3d& normal, const Eigen::Vector3d& velocity) {
  if (std::abs(normal.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument("plane normal must be unit length");
  }
  const double a = std::abs(normal.dot(velocity));
  return a / std::sqrt(1.0 + a * a);
}

}  // namespace stnormal
