#include <doctest.h>

#include <random>
#include <set>

#include "dds/errors.hpp"
#include "dds/teacher.hpp"
#include "oracles.hpp"

using namespace dds;

namespace {

/// Downward-looking camera over the unit-ish stage used by the mask tests.
CameraModel topdown_camera(int w = 64, int h = 64, double focal = 40.0, double height = 10.0) {
  CameraModel cam;
  cam.width = w;
  cam.height = h;
  cam.intrinsics << focal, 0, (w - 1) / 2.0, 0, focal, (h - 1) / 2.0, 0, 0, 1;
  // Looking straight down -z from `height`: camera x = world x, camera y =
  // world -y, camera z = world -z.
  cam.extrinsics.setZero();
  cam.extrinsics(0, 0) = 1.0;
  cam.extrinsics(1, 1) = -1.0;
  cam.extrinsics(2, 2) = -1.0;
  cam.extrinsics(2, 3) = height;
  cam.extrinsics(3, 3) = 1.0;
  return cam;
}

ViewFeatureMap constant_map(const CameraModel& cam, const Eigen::VectorXd& value) {
  ViewFeatureMap map;
  map.channels = static_cast<int>(value.size());
  map.height = cam.height;
  map.width = cam.width;
  map.values.resize(static_cast<std::size_t>(map.channels) * cam.height * cam.width);
  for (int c = 0; c < map.channels; ++c)
    for (int i = 0; i < cam.height * cam.width; ++i)
      map.values[static_cast<std::size_t>(c) * cam.height * cam.width + i] =
          static_cast<float>(value[c]);
  return map;
}

ViewMaskSet::Mask full_mask(const std::string& label, const CameraModel& cam) {
  ViewMaskSet::Mask mask;
  mask.label = label;
  for (std::int64_t p = 0; p < static_cast<std::int64_t>(cam.width) * cam.height; ++p)
    mask.pixels.push_back(p);
  return mask;
}

}  // namespace

TEST_SUITE("teacher") {

TEST_CASE("single view teacher equals the sampled feature up to epsilon") {
  const CameraModel cam = topdown_camera();
  Eigen::VectorXd f(3);
  f << 0.2, -1.5, 3.0;

  PointCloud cloud;
  cloud.positions.resize(1, 3);
  cloud.positions.row(0) << 0.0, 0.0, 0.0;

  const TeacherField t = build_teacher(cloud, {{cam, constant_map(cam, f)}});
  REQUIRE(t.visible[0]);
  CHECK(t.view_counts[0] == 1);
  CHECK((t.features.row(0).transpose() - f).norm() / f.norm() < 1e-7);
}

TEST_CASE("invisible points get zero rows") {
  const CameraModel cam = topdown_camera();
  Eigen::VectorXd f(2);
  f << 1.0, 2.0;

  PointCloud cloud;
  cloud.positions.resize(2, 3);
  cloud.positions.row(0) << 0.0, 0.0, 0.0;
  cloud.positions.row(1) << 0.0, 0.0, 20.0;  // behind the downward camera

  const TeacherField t = build_teacher(cloud, {{cam, constant_map(cam, f)}});
  CHECK(t.visible[0]);
  CHECK_FALSE(t.visible[1]);
  CHECK(t.view_counts[1] == 0);
  CHECK(t.features.row(1).norm() == 0.0);
}

TEST_CASE("multi-view aggregation matches a direct sum over views") {
  std::mt19937_64 rng(5);
  const PointCloud cloud = oracles::random_cloud(60, rng, 2.0);

  std::vector<std::pair<CameraModel, ViewFeatureMap>> views;
  for (int v = 0; v < 3; ++v) {
    const CameraModel cam = oracles::random_camera(rng);
    ViewFeatureMap map;
    map.channels = 4;
    map.height = cam.height;
    map.width = cam.width;
    map.values.resize(static_cast<std::size_t>(4) * cam.height * cam.width);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (auto& x : map.values) x = static_cast<float>(uni(rng));
    views.emplace_back(cam, std::move(map));
  }

  const TeacherField got = build_teacher(cloud, views);

  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(4);
    int count = 0;
    for (const auto& [cam, map] : views) {
      const Projection pr = project_point(cloud.positions.row(i), cam);
      if (!pr.visible) continue;
      const Eigen::Vector2i q = nearest_pixel(pr.pixel, cam.width, cam.height);
      for (int c = 0; c < 4; ++c) sum[c] += map.at(c, q.y(), q.x());
      ++count;
    }
    const Eigen::VectorXd want = sum / (count + 1e-8);
    CHECK((got.features.row(i).transpose() - want).norm() < 1e-9);
    CHECK(got.view_counts[static_cast<std::size_t>(i)] == count);
    CHECK(got.visible[static_cast<std::size_t>(i)] == (count > 0));
  }
}

TEST_CASE("teacher norm never exceeds the largest sampled feature norm") {
  std::mt19937_64 rng(17);
  const PointCloud cloud = oracles::random_cloud(80, rng, 2.0);
  std::vector<std::pair<CameraModel, ViewFeatureMap>> views;
  for (int v = 0; v < 4; ++v) {
    const CameraModel cam = oracles::random_camera(rng);
    ViewFeatureMap map;
    map.channels = 6;
    map.height = cam.height;
    map.width = cam.width;
    map.values.resize(static_cast<std::size_t>(6) * cam.height * cam.width);
    std::uniform_real_distribution<double> uni(-2.0, 2.0);
    for (auto& x : map.values) x = static_cast<float>(uni(rng));
    views.emplace_back(cam, std::move(map));
  }
  const TeacherField t = build_teacher(cloud, views);
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    if (!t.visible[static_cast<std::size_t>(i)]) continue;
    double max_norm = 0.0;
    for (const auto& [cam, map] : views) {
      const Projection pr = project_point(cloud.positions.row(i), cam);
      if (!pr.visible) continue;
      const Eigen::Vector2i q = nearest_pixel(pr.pixel, cam.width, cam.height);
      max_norm = std::max(max_norm, map.sample(q.x(), q.y()).norm());
    }
    CHECK(t.features.row(i).norm() <= max_norm + 1e-6);
  }
}

TEST_CASE("mismatched channel counts are rejected") {
  const CameraModel cam = topdown_camera();
  PointCloud cloud;
  cloud.positions.resize(1, 3);
  cloud.positions.row(0) << 0, 0, 0;
  CHECK_THROWS_AS(build_teacher(cloud, {{cam, constant_map(cam, Eigen::Vector2d(1, 2))},
                                        {cam, constant_map(cam, Eigen::Vector3d(1, 2, 3))}}),
                  MismatchedChannels);
}

TEST_CASE("one full-frame mask lifts every visible point") {
  const CameraModel cam = topdown_camera();
  std::mt19937_64 rng(2);
  const PointCloud cloud = oracles::random_cloud(50, rng, 2.0);

  ViewMaskSet masks;
  masks.masks.push_back(full_mask("thing", cam));

  const MaskGroups groups = lift_masks(cloud, {{cam, masks}}, {0.5, 1});
  const auto proj = project_cloud(cloud, cam);
  REQUIRE(groups.groups.size() == 1);
  for (Eigen::Index i = 0; i < cloud.size(); ++i)
    CHECK(groups.point_mask[static_cast<std::size_t>(i)] ==
          (proj[static_cast<std::size_t>(i)].visible ? 0 : -1));
}

TEST_CASE("undersized masks are dropped") {
  const CameraModel cam = topdown_camera();
  PointCloud cloud;
  cloud.positions.resize(3, 3);
  cloud.positions << 0, 0, 0, 0.1, 0, 0, 0, 0.1, 0;

  ViewMaskSet masks;
  masks.masks.push_back(full_mask("tiny", cam));
  const MaskGroups groups = lift_masks(cloud, {{cam, masks}}, {0.5, 10});
  CHECK(groups.groups.empty());
  for (int g : groups.point_mask) CHECK(g == -1);
}

TEST_CASE("lift_masks matches the exhaustive merge oracle on random mask families") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    const Eigen::Index n = 120;
    const PointCloud cloud = oracles::random_cloud(n, rng, 2.0);

    std::vector<std::pair<CameraModel, ViewMaskSet>> views;
    std::vector<oracles::TaggedMask> lifted_oracle;
    std::uniform_int_distribution<int> pick_label(0, 1);
    std::uniform_int_distribution<int> pick_start(0, static_cast<int>(n) - 40);
    for (int v = 0; v < 2; ++v) {
      const CameraModel cam = topdown_camera(96, 96, 30.0, 8.0);
      const auto proj = project_cloud(cloud, cam);
      ViewMaskSet maskset;
      for (int m = 0; m < 3; ++m) {
        // Seed the mask from a point range, then recover the true lifted set
        // (every point whose pixel lands in the mask) the slow way.
        const int start = pick_start(rng);
        const std::string label = pick_label(rng) ? "a" : "b";
        std::set<std::int64_t> pixels;
        for (int i = start; i < start + 40; ++i) {
          if (!proj[static_cast<std::size_t>(i)].visible) continue;
          const Eigen::Vector2i q =
              nearest_pixel(proj[static_cast<std::size_t>(i)].pixel, cam.width, cam.height);
          pixels.insert(static_cast<std::int64_t>(q.y()) * cam.width + q.x());
        }
        if (pixels.empty()) continue;
        oracles::TaggedMask tagged{label, {}, v, static_cast<int>(maskset.masks.size())};
        for (Eigen::Index i = 0; i < n; ++i) {
          if (!proj[static_cast<std::size_t>(i)].visible) continue;
          const Eigen::Vector2i q =
              nearest_pixel(proj[static_cast<std::size_t>(i)].pixel, cam.width, cam.height);
          if (pixels.count(static_cast<std::int64_t>(q.y()) * cam.width + q.x()))
            tagged.points.insert(static_cast<int>(i));
        }
        if (!tagged.points.empty()) lifted_oracle.push_back(std::move(tagged));
        ViewMaskSet::Mask mask;
        mask.label = label;
        mask.pixels.assign(pixels.begin(), pixels.end());
        maskset.masks.push_back(std::move(mask));
      }
      views.emplace_back(cam, std::move(maskset));
    }

    const MaskGroups got = lift_masks(cloud, views, {0.5, 10});
    const auto want =
        oracles::lift_masks_bruteforce(lifted_oracle, static_cast<int>(n), 0.5, 10);

    REQUIRE(got.groups.size() == want.groups.size());
    for (std::size_t g = 0; g < want.groups.size(); ++g) {
      CHECK(got.groups[g].label == want.groups[g].first);
      CHECK(got.groups[g].points == want.groups[g].second);
    }
    CHECK(got.point_mask == want.point_mask);
  }
}

TEST_CASE("merged groups equal the union for a clean two-view overlap") {
  // Deterministic construction: both views see the same 30 points under the
  // same label with point-set IoU 1.0 on 24 shared points.
  const CameraModel cam = topdown_camera(128, 128, 50.0, 8.0);
  PointCloud cloud;
  cloud.positions.resize(30, 3);
  for (int i = 0; i < 30; ++i)
    cloud.positions.row(i) << -1.0 + 2.0 * i / 29.0, 0.5 - i * 0.03, 0.0;
  const auto proj = project_cloud(cloud, cam);

  const auto mask_for_range = [&](int begin, int end) {
    ViewMaskSet::Mask mask;
    mask.label = "bar";
    std::set<std::int64_t> pixels;
    for (int i = begin; i < end; ++i) {
      const Eigen::Vector2i q =
          nearest_pixel(proj[static_cast<std::size_t>(i)].pixel, cam.width, cam.height);
      pixels.insert(static_cast<std::int64_t>(q.y()) * cam.width + q.x());
    }
    mask.pixels.assign(pixels.begin(), pixels.end());
    return mask;
  };

  ViewMaskSet v0, v1;
  v0.masks.push_back(mask_for_range(0, 27));   // points 0..26
  v1.masks.push_back(mask_for_range(3, 30));   // points 3..29, IoU = 24/30 = 0.8
  const MaskGroups groups = lift_masks(cloud, {{cam, v0}, {cam, v1}}, {0.5, 10});

  REQUIRE(groups.groups.size() == 1);
  CHECK(groups.groups[0].points.size() == 30);  // the union
  for (int g : groups.point_mask) CHECK(g == 0);
}

TEST_CASE("group family partitions the covered points") {
  std::mt19937_64 rng(31);
  const PointCloud cloud = oracles::random_cloud(150, rng, 2.5);
  std::vector<std::pair<CameraModel, ViewMaskSet>> views;
  for (int v = 0; v < 3; ++v) {
    const CameraModel cam = topdown_camera(96, 96, 28.0, 9.0);
    ViewMaskSet maskset;
    std::uniform_int_distribution<std::int64_t> pix(0, 96 * 96 - 1);
    for (int m = 0; m < 4; ++m) {
      std::set<std::int64_t> pixels;
      for (int p = 0; p < 900; ++p) pixels.insert(pix(rng));
      ViewMaskSet::Mask mask;
      mask.label = m % 2 ? "x" : "y";
      mask.pixels.assign(pixels.begin(), pixels.end());
      maskset.masks.push_back(std::move(mask));
    }
    views.emplace_back(cam, std::move(maskset));
  }
  const MaskGroups groups = lift_masks(cloud, views, {0.5, 5});

  std::size_t covered = 0;
  for (int g : groups.point_mask)
    if (g != -1) ++covered;
  std::size_t group_sum = 0;
  for (std::size_t m = 0; m < groups.groups.size(); ++m) {
    group_sum += groups.groups[m].points.size();
    for (int p : groups.groups[m].points)
      CHECK(groups.point_mask[static_cast<std::size_t>(p)] == static_cast<int>(m));
  }
  CHECK(covered == group_sum);
}

TEST_CASE("collect_point_labels gathers one label per covering per-view mask") {
  const CameraModel cam = topdown_camera();
  PointCloud cloud;
  cloud.positions.resize(12, 3);
  for (int i = 0; i < 12; ++i) cloud.positions.row(i) << i * 0.05, 0.0, 0.0;

  ViewMaskSet masks;
  masks.masks.push_back(full_mask("a", cam));
  masks.masks.push_back(full_mask("b", cam));

  const auto labels = collect_point_labels(cloud, {{cam, masks}, {cam, masks}}, {0.5, 1});
  for (const auto& per_point : labels) {
    REQUIRE(per_point.size() == 4);  // two masks in each of two views
    CHECK(std::count(per_point.begin(), per_point.end(), "a") == 2);
    CHECK(std::count(per_point.begin(), per_point.end(), "b") == 2);
  }
}

}  // TEST_SUITE
