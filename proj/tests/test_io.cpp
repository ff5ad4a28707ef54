#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>

#include "dds/errors.hpp"
#include "dds/io.hpp"
#include "oracles.hpp"

using namespace dds;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("dds_io_test_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_SUITE("io") {

TEST_CASE("point cloud round-trips with and without ground truth") {
  TempDir dir;
  std::mt19937_64 rng(3);
  PointCloud cloud = oracles::random_cloud(77, rng);
  // f32 storage: snap coordinates to float before comparing.
  for (Eigen::Index i = 0; i < cloud.size(); ++i)
    for (int a = 0; a < 3; ++a)
      cloud.positions(i, a) = static_cast<double>(static_cast<float>(cloud.positions(i, a)));

  save_point_cloud(dir.file("plain.ddsp"), cloud);
  const PointCloud plain = load_point_cloud(dir.file("plain.ddsp"));
  CHECK(plain.positions == cloud.positions);
  CHECK_FALSE(plain.has_gt());

  cloud.gt_class.assign(77, 0);
  for (int i = 0; i < 77; ++i) cloud.gt_class[static_cast<std::size_t>(i)] = i % 5;
  save_point_cloud(dir.file("gt.ddsp"), cloud);
  const PointCloud with_gt = load_point_cloud(dir.file("gt.ddsp"));
  CHECK(with_gt.gt_class == cloud.gt_class);
}

TEST_CASE("camera round-trips exactly") {
  TempDir dir;
  std::mt19937_64 rng(5);
  const CameraModel cam = oracles::random_camera(rng);
  save_camera(dir.file("cam.json"), cam);
  const CameraModel loaded = load_camera(dir.file("cam.json"));
  CHECK(loaded.intrinsics == cam.intrinsics);
  CHECK(loaded.extrinsics == cam.extrinsics);
  CHECK(loaded.width == cam.width);
  CHECK(loaded.height == cam.height);
}

TEST_CASE("feature map round-trips exactly") {
  TempDir dir;
  std::mt19937_64 rng(7);
  ViewFeatureMap map;
  map.channels = 3;
  map.height = 8;
  map.width = 11;
  map.values.resize(3 * 8 * 11);
  std::uniform_real_distribution<float> uni(-2.0f, 2.0f);
  for (auto& x : map.values) x = uni(rng);

  save_feature_map(dir.file("map.ddsf"), map);
  const ViewFeatureMap loaded = load_feature_map(dir.file("map.ddsf"));
  CHECK(loaded.channels == 3);
  CHECK(loaded.height == 8);
  CHECK(loaded.width == 11);
  CHECK(loaded.values == map.values);
}

TEST_CASE("rle encoding is the inverse of decoding for random pixel sets") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    std::set<std::int64_t> pixels;
    std::uniform_int_distribution<std::int64_t> pick(0, 400);
    std::uniform_int_distribution<int> count(0, 120);
    const int n = count(rng);
    for (int i = 0; i < n; ++i) pixels.insert(pick(rng));
    const std::vector<std::int64_t> flat(pixels.begin(), pixels.end());
    CHECK(rle_decode(rle_encode(flat)) == flat);
  }
}

TEST_CASE("rle rejects malformed runs") {
  CHECK_THROWS_AS(rle_decode({3}), IoError);
  CHECK_THROWS_AS(rle_decode({3, 0}), IoError);
  CHECK_THROWS_AS(rle_decode({3, 5, 4, 2}), IoError);  // overlapping
}

TEST_CASE("mask sets round-trip through rle json") {
  TempDir dir;
  ViewMaskSet masks;
  masks.masks.push_back({"car", {0, 1, 2, 10, 11, 40}});
  masks.masks.push_back({"tree", {5, 7, 9}});
  save_mask_set(dir.file("masks.json"), masks, 16, 16);
  const ViewMaskSet loaded = load_mask_set(dir.file("masks.json"), 16, 16);
  REQUIRE(loaded.masks.size() == 2);
  CHECK(loaded.masks[0].label == "car");
  CHECK(loaded.masks[0].pixels == masks.masks[0].pixels);
  CHECK(loaded.masks[1].pixels == masks.masks[1].pixels);
}

TEST_CASE("mask pixels outside the image are rejected") {
  TempDir dir;
  ViewMaskSet masks;
  masks.masks.push_back({"car", {300}});
  CHECK_THROWS_AS(save_mask_set(dir.file("bad.json"), masks, 16, 16), IoError);
}

TEST_CASE("partition round-trips exactly") {
  TempDir dir;
  SuperpointPartition p;
  p.assignment = {0, 2, 1, 2, 0, 1, 1};
  p.count = 3;
  p.sizes = {2, 3, 2};
  save_partition(dir.file("p.ddss"), p);
  const SuperpointPartition loaded = load_partition(dir.file("p.ddss"));
  CHECK(loaded.assignment == p.assignment);
  CHECK(loaded.count == p.count);
  CHECK(loaded.sizes == p.sizes);
}

TEST_CASE("teacher field and matrices round-trip bit-exactly") {
  TempDir dir;
  std::mt19937_64 rng(11);
  TeacherField field;
  field.features = oracles::random_matrix(13, 6, rng);
  field.visible = {true, false, true, true, false, true, true, true, false, true, true, false, true};
  field.view_counts = {1, 0, 2, 3, 0, 1, 4, 2, 0, 1, 1, 0, 5};
  save_teacher(dir.file("t.ddst"), field);
  const TeacherField loaded = load_teacher(dir.file("t.ddst"));
  CHECK(loaded.features == field.features);
  CHECK(loaded.visible == field.visible);
  CHECK(loaded.view_counts == field.view_counts);

  const Eigen::MatrixXd m = oracles::random_matrix(9, 4, rng);
  save_matrix(dir.file("m.ddsh"), m);
  CHECK(load_matrix(dir.file("m.ddsh")) == m);
}

TEST_CASE("bad magic bytes are reported") {
  TempDir dir;
  write_text_file(dir.file("junk.ddsp"), "not a point cloud");
  CHECK_THROWS_AS(load_point_cloud(dir.file("junk.ddsp")), IoError);
  write_text_file(dir.file("junk.ddsf"), "XXXXxxxxyyyyzzzz");
  CHECK_THROWS_AS(load_feature_map(dir.file("junk.ddsf")), IoError);
  CHECK_THROWS_AS(load_point_cloud(dir.file("missing.ddsp")), IoError);
}

TEST_CASE("truncated files are reported") {
  TempDir dir;
  std::mt19937_64 rng(13);
  PointCloud cloud = oracles::random_cloud(5, rng);
  save_point_cloud(dir.file("c.ddsp"), cloud);
  const std::string bytes = read_text_file(dir.file("c.ddsp"));
  write_text_file(dir.file("cut.ddsp"), bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(load_point_cloud(dir.file("cut.ddsp")), IoError);
}

}  // TEST_SUITE
