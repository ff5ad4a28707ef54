#include <doctest.h>

#include <random>

#include "dds/errors.hpp"
#include "dds/geometry.hpp"
#include "oracles.hpp"

using namespace dds;

TEST_SUITE("geometry") {

TEST_CASE("optical axis point lands on the principal point") {
  CameraModel cam;
  cam.width = 640;
  cam.height = 480;
  cam.intrinsics << 500, 0, 320.5, 0, 500, 240.5, 0, 0, 1;

  const Projection p = project_point({0.0, 0.0, 2.0}, cam);
  CHECK(p.visible);
  CHECK(p.depth == doctest::Approx(2.0));
  CHECK(p.pixel.x() == doctest::Approx(320.5));
  CHECK(p.pixel.y() == doctest::Approx(240.5));
}

TEST_CASE("points behind the camera are invisible") {
  CameraModel cam;
  cam.width = 640;
  cam.height = 480;
  cam.intrinsics << 500, 0, 320, 0, 500, 240, 0, 0, 1;

  CHECK_FALSE(project_point({0.0, 0.0, -1.0}, cam).visible);
  CHECK_FALSE(project_point({0.1, -0.2, 0.0}, cam).visible);
}

TEST_CASE("random projections match the homogeneous-coordinates oracle") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> uni(-4.0, 4.0);
  for (int t = 0; t < 500; ++t) {
    const CameraModel cam = oracles::random_camera(rng);
    const Eigen::Vector3d p(uni(rng), uni(rng), uni(rng));
    const Projection got = project_point(p, cam);
    const auto want = oracles::project_homogeneous(p, cam);
    if (std::abs(want.depth) < 1e-6) continue;  // skip the degenerate slice
    CHECK(got.depth == doctest::Approx(want.depth).epsilon(1e-9));
    CHECK((got.pixel - want.pixel).norm() < 1e-9 * std::max(1.0, want.pixel.norm()));
    CHECK(got.visible == want.visible);
  }
}

TEST_CASE("project_cloud equals per-point projection") {
  std::mt19937_64 rng(7);
  const CameraModel cam = oracles::random_camera(rng);
  const PointCloud cloud = oracles::random_cloud(100, rng);

  for (int threads : {1, 4}) {
    const auto batch = project_cloud(cloud, cam, threads);
    REQUIRE(batch.size() == 100);
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
      const Projection single = project_point(cloud.positions.row(i), cam);
      CHECK(batch[static_cast<std::size_t>(i)].pixel == single.pixel);
      CHECK(batch[static_cast<std::size_t>(i)].depth == single.depth);
      CHECK(batch[static_cast<std::size_t>(i)].visible == single.visible);
    }
  }
}

TEST_CASE("all points behind the camera yield no visibility") {
  CameraModel cam;
  cam.width = 64;
  cam.height = 64;
  cam.intrinsics << 50, 0, 32, 0, 50, 32, 0, 0, 1;

  PointCloud cloud;
  cloud.positions.resize(5, 3);
  for (int i = 0; i < 5; ++i) cloud.positions.row(i) << i * 0.1, -i * 0.2, -1.0 - i;
  for (const auto& p : project_cloud(cloud, cam)) CHECK_FALSE(p.visible);
}

TEST_CASE("rigid transform applied to both point and camera leaves projection unchanged") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(-3.0, 3.0);
  for (int t = 0; t < 100; ++t) {
    const CameraModel cam = oracles::random_camera(rng);
    const Eigen::Vector3d p(uni(rng), uni(rng), uni(rng) + 4.0);

    Eigen::Quaterniond q(uni(rng), uni(rng), uni(rng), uni(rng));
    while (q.norm() < 1e-3) q = Eigen::Quaterniond(uni(rng), uni(rng), uni(rng), uni(rng));
    q.normalize();
    Eigen::Matrix4d world = Eigen::Matrix4d::Identity();
    world.block<3, 3>(0, 0) = q.toRotationMatrix();
    world.block<3, 1>(0, 3) = Eigen::Vector3d(uni(rng), uni(rng), uni(rng));

    CameraModel moved = cam;
    moved.extrinsics = cam.extrinsics * world.inverse();
    const Eigen::Vector3d p_moved = (world * p.homogeneous()).head<3>();

    const Projection a = project_point(p, cam);
    const Projection b = project_point(p_moved, moved);
    CHECK(a.depth == doctest::Approx(b.depth).epsilon(1e-9));
    CHECK((a.pixel - b.pixel).norm() < 1e-8);
  }
}

TEST_CASE("visible projections sample feature grids in bounds") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uni(-6.0, 6.0);
  for (int t = 0; t < 2000; ++t) {
    const CameraModel cam = oracles::random_camera(rng);
    const Projection p = project_point({uni(rng), uni(rng), uni(rng)}, cam);
    if (!p.visible) continue;
    const Eigen::Vector2i q = nearest_pixel(p.pixel, cam.width, cam.height);
    CHECK(q.x() >= 0);
    CHECK(q.x() < cam.width);
    CHECK(q.y() >= 0);
    CHECK(q.y() < cam.height);
  }
}

TEST_CASE("validation rejects malformed inputs") {
  PointCloud empty;
  empty.positions.resize(0, 3);
  CHECK_THROWS_AS(empty.validate(), Error);

  PointCloud bad;
  bad.positions.resize(1, 3);
  bad.positions.row(0) << 0.0, std::numeric_limits<double>::quiet_NaN(), 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);

  CameraModel cam;
  cam.width = 10;
  cam.height = 10;
  cam.intrinsics << -5, 0, 5, 0, 5, 5, 0, 0, 1;
  CHECK_THROWS_AS(cam.validate(), Error);

  cam.intrinsics(0, 0) = 5;
  cam.extrinsics(0, 0) = 2.0;  // not a rotation
  CHECK_THROWS_AS(cam.validate(), Error);
}

}  // TEST_SUITE
