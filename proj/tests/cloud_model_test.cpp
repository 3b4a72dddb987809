// SPDX-FileCopyrightText: 2026 stnormal contributors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <fstream>
#include <random>

#include "stnormal/cloud_io.hpp"
#include "stnormal/error.hpp"
#include "stnormal/registration.hpp"
#include "stnormal/scoring.hpp"
#include "support.hpp"

using namespace stnormal;
using stnormal::test::TempDir;

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace

TEST_CASE("csv rows become a cloud stamped at the time midpoint") {
  TempDir dir;
  write_text(dir / "a.csv", "x,y,z,t\n0,0,0,0.0\n1,0,0,0.0\n");
  const Cloud c = read_cloud(dir / "a.csv", CloudFormat::kCsv);
  REQUIRE(c.size() == 2);
  CHECK(c.stamp == 0.0);
  CHECK(c.points[1] == TimedPoint{1, 0, 0, 0});
}

TEST_CASE("csv columns are found by name in any order and case") {
  TempDir dir;
  write_text(dir / "a.csv", "T, Z ,y,X,intensity\n0.5,3,2,1,7\n0.7,6,5,4,7\n");
  const Cloud c = read_cloud(dir / "a.csv", CloudFormat::kCsv);
  REQUIRE(c.size() == 2);
  CHECK(c.points[0] == TimedPoint{1, 2, 3, 0.5});
  CHECK(c.stamp == doctest::Approx(0.6));
}

TEST_CASE("non-finite csv rows are dropped and counted") {
  TempDir dir;
  write_text(dir / "a.csv", "x,y,z,t\n0,0,0,0.1\n1,2,nan,0.1\n3,3,3,0.1\n4,4,4,inf\n");
  ReadStats stats;
  const Cloud c = read_cloud(dir / "a.csv", CloudFormat::kCsv, {}, &stats);
  CHECK(c.size() == 2);
  CHECK(stats.rejected_non_finite == 2);
  CHECK(stats.rows == 4);
  CHECK(stats.dropped_rows == std::vector<std::size_t>{1, 3});
}

TEST_CASE("a cloud without a time field is rejected unless a constant time is given") {
  TempDir dir;
  write_text(dir / "a.ply",
             "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\n"
             "property float z\nend_header\n0 0 0\n1 1 1\n");
  try {
    read_cloud(dir / "a.ply", CloudFormat::kPly);
    FAIL("expected MissingFieldError");
  } catch (const MissingFieldError& e) {
    CHECK(e.field() == "t");
  }
  ReadOptions options;
  options.constant_time = 2.5;
  const Cloud c = read_cloud(dir / "a.ply", CloudFormat::kPly, options);
  REQUIRE(c.size() == 2);
  CHECK(c.points[1].t == 2.5);
  CHECK(c.stamp == 2.5);
}

TEST_CASE("malformed input raises parse errors with the line number") {
  TempDir dir;
  write_text(dir / "a.csv", "x,y,z,t\n0,0,0,0\n1,2,3\n");
  try {
    read_cloud(dir / "a.csv", CloudFormat::kCsv);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  write_text(dir / "b.ply", "plx\n");
  CHECK_THROWS_AS(read_cloud(dir / "b.ply", CloudFormat::kPly), ParseError);
  CHECK_THROWS_AS(read_cloud(dir / "missing.csv", CloudFormat::kCsv), IoError);
  write_text(dir / "empty.csv", "x,y,z,t\n");
  CHECK_THROWS_AS(read_cloud(dir / "empty.csv", CloudFormat::kCsv), EmptyCloudError);
}

TEST_CASE("write then read returns identical coordinates and times") {
  TempDir dir;
  const Cloud in = make_cloud(3, {{0.1, -2.25, 3.0 / 7.0, 100.125},
                                  {1e-9, 5.5, -0.3, 100.2},
                                  {12345.678, 0, 1, 100.05}});
  write_cloud(in, dir / "a.csv", CloudFormat::kCsv);
  const Cloud csv = read_cloud(dir / "a.csv", CloudFormat::kCsv);
  REQUIRE(csv.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(csv.points[i] == in.points[i]);

  // PLY stores positions as float and times as double.
  for (const auto enc : {PlyEncoding::kAscii, PlyEncoding::kBinaryLittleEndian}) {
    WriteOptions options;
    options.ply_encoding = enc;
    write_cloud(in, dir / "a.ply", CloudFormat::kPly, options);
    const Cloud ply = read_cloud(dir / "a.ply", CloudFormat::kPly);
    REQUIRE(ply.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(ply.points[i].x == static_cast<double>(static_cast<float>(in.points[i].x)));
      CHECK(ply.points[i].y == static_cast<double>(static_cast<float>(in.points[i].y)));
      CHECK(ply.points[i].z == static_cast<double>(static_cast<float>(in.points[i].z)));
      CHECK(ply.points[i].t == in.points[i].t);
    }
  }
}

TEST_CASE("scored points serialize their threshold label") {
  TempDir dir;
  ScoredPoint sp;
  sp.point = {1, 2, 3, 4};
  sp.score = 0.3;
  sp.valid = true;
  sp.label = classify_score(sp.score, sp.valid, 0.25);
  write_scored(std::vector<ScoredPoint>{sp}, dir / "s.csv", CloudFormat::kCsv);
  std::ifstream in(dir / "s.csv");
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "x,y,z,t,score,label");
  CHECK(row.substr(row.rfind(',') + 1) == "dynamic");

  for (const auto fmt : {CloudFormat::kCsv, CloudFormat::kPly}) {
    const auto path = dir / (fmt == CloudFormat::kCsv ? "r.csv" : "r.ply");
    write_scored(std::vector<ScoredPoint>{sp}, path, fmt);
    const auto back = read_scored(path, fmt);
    REQUIRE(back.size() == 1);
    CHECK(back[0].score == 0.3);
    CHECK(back[0].label == Label::kDynamic);
  }
}

TEST_CASE("empty point lists are an error unless explicitly allowed") {
  TempDir dir;
  CHECK_THROWS_AS(write_cloud(Cloud{}, dir / "e.csv", CloudFormat::kCsv), EmptyCloudError);
  CHECK_THROWS_AS(write_scored({}, dir / "e.ply", CloudFormat::kPly), EmptyCloudError);
  WriteOptions options;
  options.allow_empty = true;
  write_scored({}, dir / "e.csv", CloudFormat::kCsv, options);
  std::ifstream in(dir / "e.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "x,y,z,t,score,label");
}

TEST_CASE("format follows the extension") {
  CHECK(format_from_path("a/b.PLY") == CloudFormat::kPly);
  CHECK(format_from_path("b.csv") == CloudFormat::kCsv);
  CHECK_THROWS_AS(format_from_path("b.pcd"), IoError);
}

TEST_CASE("stamp outliers are points more than one period from the stamp") {
  const Cloud c = make_cloud(0, {{0, 0, 0, 0.0}, {0, 0, 0, 0.1}, {0, 0, 0, 0.5}});
  CHECK(c.stamp == doctest::Approx(0.25));
  CHECK(count_stamp_outliers(c, 0.1) == 3);
  CHECK(count_stamp_outliers(c, 0.25) == 0);
}

TEST_CASE("poses normalize their quaternion and reject garbage") {
  const Pose p(0.0, Eigen::Vector3d::Zero(), Eigen::Quaterniond(2, 0, 0, 0));
  CHECK(p.rotation().norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(Pose(0.0, Eigen::Vector3d::Zero(), Eigen::Quaterniond(0, 0, 0, 0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(Pose(NAN, Eigen::Vector3d::Zero(), Eigen::Quaterniond::Identity()),
                  std::invalid_argument);
}

TEST_CASE("identity registration returns the input") {
  const Cloud c = make_cloud(0, {{1, 2, 3, 0.0}, {-1, 0.5, 2, 0.1}});
  const Cloud out = transform_cloud(c, Pose());
  CHECK(out.points == c.points);
  CHECK(out.stamp == c.stamp);
}

TEST_CASE("pure translation moves the origin") {
  const Cloud c = make_cloud(0, {{0, 0, 0, 0.0}});
  const Cloud out =
      transform_cloud(c, Pose(0.0, Eigen::Vector3d(1, 0, 0), Eigen::Quaterniond::Identity()));
  CHECK(out.points[0] == TimedPoint{1, 0, 0, 0});
}

TEST_CASE("linear interpolation halfway between two poses") {
  const Trajectory traj({Pose(0.0, Eigen::Vector3d(0, 0, 0), Eigen::Quaterniond::Identity()),
                         Pose(1.0, Eigen::Vector3d(2, 0, 0), Eigen::Quaterniond::Identity())});
  const Pose mid = traj.at(0.5, Interpolation::kLinear);
  // scalar lerp oracle
  const double x = (1.0 - 0.5) * 0.0 + 0.5 * 2.0;
  CHECK(mid.translation().isApprox(Eigen::Vector3d(x, 0, 0)));
  CHECK(traj.at(0.4, Interpolation::kNearest).translation().x() == 0.0);
  CHECK(traj.at(0.6, Interpolation::kNearest).translation().x() == 2.0);

  CHECK_THROWS_AS(traj.at(1.2, Interpolation::kLinear), OutOfRangeStampError);
  CHECK(traj.at(1.05, Interpolation::kLinear, 0.1).translation().x() == 2.0);
  CHECK_THROWS_AS(Trajectory({Pose(0.0, Eigen::Vector3d::Zero(), Eigen::Quaterniond::Identity()),
                              Pose(0.0, Eigen::Vector3d::Zero(), Eigen::Quaterniond::Identity())}),
                  std::invalid_argument);
}

TEST_CASE("slerped rotations stay unit length") {
  const Eigen::Quaterniond a(Eigen::AngleAxisd(0.1, Eigen::Vector3d::UnitZ()));
  const Eigen::Quaterniond b(Eigen::AngleAxisd(2.5, Eigen::Vector3d(1, 1, 0).normalized()));
  const Trajectory traj({Pose(0.0, Eigen::Vector3d::Zero(), a), Pose(1.0, Eigen::Vector3d::Zero(), b)});
  for (double s = 0.0; s <= 1.0; s += 0.05) {
    CHECK(std::abs(traj.at(s, Interpolation::kLinear).rotation().norm() - 1.0) <= 1e-6);
  }
}

TEST_CASE("registration preserves pairwise distances") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::vector<TimedPoint> pts;
  for (int i = 0; i < 200; ++i) pts.push_back({u(rng), u(rng), u(rng), 0.05 * (i % 3)});
  const Cloud c = make_cloud(0, pts);
  const Eigen::Quaterniond q0(Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, 3).normalized()));
  const Eigen::Quaterniond q1(Eigen::AngleAxisd(-1.1, Eigen::Vector3d(0, 1, 0)));
  const Trajectory traj({Pose(-1.0, Eigen::Vector3d(5, -3, 2), q0),
                         Pose(1.0, Eigen::Vector3d(-4, 1, 0.5), q1)});
  const Cloud out = apply_registration(c, traj, Interpolation::kLinear);
  for (int k = 0; k < 500; ++k) {
    const std::size_t i = static_cast<std::size_t>(k * 7) % pts.size();
    const std::size_t j = static_cast<std::size_t>(k * 13 + 1) % pts.size();
    const double before = (pts[i].xyz() - pts[j].xyz()).norm();
    const double after = (out.points[i].xyz() - out.points[j].xyz()).norm();
    CHECK(std::abs(before - after) <= 1e-9);
  }
}

TEST_CASE("trajectory files round-trip") {
  TempDir dir;
  const Eigen::Quaterniond q(Eigen::AngleAxisd(0.3, Eigen::Vector3d::UnitX()));
  const Trajectory traj({Pose(0.0, Eigen::Vector3d(1, 2, 3), q),
                         Pose(0.1, Eigen::Vector3d(4, 5, 6), Eigen::Quaterniond::Identity())});
  write_trajectory(traj, dir / "poses.txt");
  const Trajectory back = read_trajectory(dir / "poses.txt");
  REQUIRE(back.size() == 2);
  CHECK(back.poses()[0].translation() == Eigen::Vector3d(1, 2, 3));
  CHECK(back.poses()[0].rotation().isApprox(q, 1e-15));
  write_text(dir / "bad.txt", "# comment\n0.0 1 2 3 0 0 0\n");
  CHECK_THROWS_AS(read_trajectory(dir / "bad.txt"), ParseError);
}
