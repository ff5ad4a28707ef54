#include "dds/io.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dds/errors.hpp"

namespace dds {

namespace {

using json = nlohmann::json;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  return in;
}

template <typename T>
void write_pod(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in, const std::string& path) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw IoError("truncated file: " + path);
  return value;
}

void write_magic(std::ofstream& out, const char* magic) { out.write(magic, 4); }

void expect_magic(std::ifstream& in, const char* magic, const std::string& path) {
  std::array<char, 4> buf{};
  in.read(buf.data(), 4);
  if (!in || std::memcmp(buf.data(), magic, 4) != 0)
    throw IoError("bad magic (expected " + std::string(magic) + "): " + path);
}

json parse_json_file(const std::string& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw IoError("malformed JSON in " + path + ": " + e.what());
  }
}

}  // namespace

void save_point_cloud(const std::string& path, const PointCloud& cloud) {
  cloud.validate();
  auto out = open_out(path);
  write_magic(out, "DDSP");
  write_pod<std::uint32_t>(out, 1);  // version
  write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(cloud.size()));
  write_pod<std::uint8_t>(out, cloud.has_gt() ? 1 : 0);
  for (Eigen::Index i = 0; i < cloud.size(); ++i)
    for (int a = 0; a < 3; ++a) write_pod<float>(out, static_cast<float>(cloud.positions(i, a)));
  if (cloud.has_gt())
    for (int g : cloud.gt_class) write_pod<std::uint16_t>(out, static_cast<std::uint16_t>(g));
  if (!out) throw IoError("write failed: " + path);
}

PointCloud load_point_cloud(const std::string& path) {
  auto in = open_in(path);
  expect_magic(in, "DDSP", path);
  const auto version = read_pod<std::uint32_t>(in, path);
  if (version != 1) throw IoError("unsupported point cloud version in " + path);
  const auto n = read_pod<std::uint64_t>(in, path);
  const auto has_gt = read_pod<std::uint8_t>(in, path);

  PointCloud cloud;
  cloud.positions.resize(static_cast<Eigen::Index>(n), 3);
  for (std::uint64_t i = 0; i < n; ++i)
    for (int a = 0; a < 3; ++a)
      cloud.positions(static_cast<Eigen::Index>(i), a) = read_pod<float>(in, path);
  if (has_gt) {
    cloud.gt_class.resize(n);
    for (std::uint64_t i = 0; i < n; ++i) cloud.gt_class[i] = read_pod<std::uint16_t>(in, path);
  }
  cloud.validate();
  return cloud;
}

void save_camera(const std::string& path, const CameraModel& cam) {
  cam.validate();
  json j;
  std::vector<double> k(9), e(16);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) k[static_cast<std::size_t>(r * 3 + c)] = cam.intrinsics(r, c);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) e[static_cast<std::size_t>(r * 4 + c)] = cam.extrinsics(r, c);
  j["intrinsics"] = k;
  j["extrinsics"] = e;
  j["width"] = cam.width;
  j["height"] = cam.height;
  write_text_file(path, j.dump(2) + "\n");
}

CameraModel load_camera(const std::string& path) {
  const json j = parse_json_file(path);
  CameraModel cam;
  try {
    const auto k = j.at("intrinsics").get<std::vector<double>>();
    const auto e = j.at("extrinsics").get<std::vector<double>>();
    if (k.size() != 9 || e.size() != 16)
      throw IoError("camera matrices must hold 9 and 16 floats: " + path);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) cam.intrinsics(r, c) = k[static_cast<std::size_t>(r * 3 + c)];
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) cam.extrinsics(r, c) = e[static_cast<std::size_t>(r * 4 + c)];
    cam.width = j.at("width").get<int>();
    cam.height = j.at("height").get<int>();
  } catch (const json::exception& e) {
    throw IoError("malformed camera JSON in " + path + ": " + e.what());
  }
  cam.validate();
  return cam;
}

void save_feature_map(const std::string& path, const ViewFeatureMap& map) {
  map.validate();
  auto out = open_out(path);
  write_magic(out, "DDSF");
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(map.channels));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(map.height));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(map.width));
  out.write(reinterpret_cast<const char*>(map.values.data()),
            static_cast<std::streamsize>(map.values.size() * sizeof(float)));
  if (!out) throw IoError("write failed: " + path);
}

ViewFeatureMap load_feature_map(const std::string& path) {
  auto in = open_in(path);
  expect_magic(in, "DDSF", path);
  ViewFeatureMap map;
  map.channels = static_cast<int>(read_pod<std::uint32_t>(in, path));
  map.height = static_cast<int>(read_pod<std::uint32_t>(in, path));
  map.width = static_cast<int>(read_pod<std::uint32_t>(in, path));
  const std::size_t count =
      static_cast<std::size_t>(map.channels) * map.height * map.width;
  map.values.resize(count);
  in.read(reinterpret_cast<char*>(map.values.data()),
          static_cast<std::streamsize>(count * sizeof(float)));
  if (!in) throw IoError("truncated file: " + path);
  map.validate();
  return map;
}

std::vector<std::int64_t> rle_decode(const std::vector<std::int64_t>& runs) {
  if (runs.size() % 2 != 0) throw IoError("rle run list must have even length");
  std::vector<std::int64_t> pixels;
  std::int64_t prev_end = -1;
  for (std::size_t r = 0; r < runs.size(); r += 2) {
    const std::int64_t start = runs[r];
    const std::int64_t len = runs[r + 1];
    if (len <= 0 || start <= prev_end)
      throw IoError("rle runs must be non-overlapping and increasing");
    for (std::int64_t p = start; p < start + len; ++p) pixels.push_back(p);
    prev_end = start + len - 1;
  }
  return pixels;
}

std::vector<std::int64_t> rle_encode(const std::vector<std::int64_t>& pixels) {
  std::vector<std::int64_t> runs;
  std::size_t i = 0;
  while (i < pixels.size()) {
    std::size_t j = i + 1;
    while (j < pixels.size() && pixels[j] == pixels[j - 1] + 1) ++j;
    runs.push_back(pixels[i]);
    runs.push_back(static_cast<std::int64_t>(j - i));
    i = j;
  }
  return runs;
}

void save_mask_set(const std::string& path, const ViewMaskSet& masks, int width, int height) {
  json list = json::array();
  const std::int64_t limit = static_cast<std::int64_t>(width) * height;
  for (const auto& mask : masks.masks) {
    for (std::int64_t p : mask.pixels)
      if (p < 0 || p >= limit) throw IoError("mask pixel out of image bounds");
    list.push_back({{"label", mask.label}, {"rle", rle_encode(mask.pixels)}});
  }
  json j;
  j["masks"] = list;
  write_text_file(path, j.dump(2) + "\n");
}

ViewMaskSet load_mask_set(const std::string& path, int width, int height) {
  const json j = parse_json_file(path);
  ViewMaskSet out;
  const std::int64_t limit = static_cast<std::int64_t>(width) * height;
  try {
    for (const auto& entry : j.at("masks")) {
      ViewMaskSet::Mask mask;
      mask.label = entry.at("label").get<std::string>();
      if (mask.label.empty()) throw IoError("mask label must be nonempty: " + path);
      mask.pixels = rle_decode(entry.at("rle").get<std::vector<std::int64_t>>());
      for (std::int64_t p : mask.pixels)
        if (p < 0 || p >= limit) throw IoError("mask pixel out of image bounds: " + path);
      out.masks.push_back(std::move(mask));
    }
  } catch (const json::exception& e) {
    throw IoError("malformed mask JSON in " + path + ": " + e.what());
  }
  return out;
}

void save_partition(const std::string& path, const SuperpointPartition& partition) {
  partition.validate();
  auto out = open_out(path);
  write_magic(out, "DDSS");
  write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(partition.assignment.size()));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(partition.count));
  for (int a : partition.assignment) write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(a));
  if (!out) throw IoError("write failed: " + path);
}

SuperpointPartition load_partition(const std::string& path) {
  auto in = open_in(path);
  expect_magic(in, "DDSS", path);
  const auto n = read_pod<std::uint64_t>(in, path);
  SuperpointPartition partition;
  partition.count = static_cast<int>(read_pod<std::uint32_t>(in, path));
  partition.assignment.resize(n);
  partition.sizes.assign(static_cast<std::size_t>(partition.count), 0);
  for (std::uint64_t i = 0; i < n; ++i) {
    partition.assignment[i] = static_cast<int>(read_pod<std::uint32_t>(in, path));
    if (partition.assignment[i] >= partition.count)
      throw IoError("assignment out of range: " + path);
    ++partition.sizes[static_cast<std::size_t>(partition.assignment[i])];
  }
  partition.validate();
  return partition;
}

void save_teacher(const std::string& path, const TeacherField& field) {
  auto out = open_out(path);
  write_magic(out, "DDST");
  write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(field.size()));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(field.channels()));
  for (Eigen::Index i = 0; i < field.size(); ++i)
    for (Eigen::Index c = 0; c < field.channels(); ++c) write_pod<double>(out, field.features(i, c));
  for (bool v : field.visible) write_pod<std::uint8_t>(out, v ? 1 : 0);
  for (int c : field.view_counts) write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(c));
  if (!out) throw IoError("write failed: " + path);
}

TeacherField load_teacher(const std::string& path) {
  auto in = open_in(path);
  expect_magic(in, "DDST", path);
  const auto n = read_pod<std::uint64_t>(in, path);
  const auto c = read_pod<std::uint32_t>(in, path);
  TeacherField field;
  field.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(c));
  for (std::uint64_t i = 0; i < n; ++i)
    for (std::uint32_t j = 0; j < c; ++j)
      field.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          read_pod<double>(in, path);
  field.visible.resize(n);
  for (std::uint64_t i = 0; i < n; ++i) field.visible[i] = read_pod<std::uint8_t>(in, path) != 0;
  field.view_counts.resize(n);
  for (std::uint64_t i = 0; i < n; ++i)
    field.view_counts[i] = static_cast<int>(read_pod<std::uint32_t>(in, path));
  return field;
}

void save_matrix(const std::string& path, const Eigen::MatrixXd& m) {
  auto out = open_out(path);
  write_magic(out, "DDSH");
  write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) write_pod<double>(out, m(i, j));
  if (!out) throw IoError("write failed: " + path);
}

Eigen::MatrixXd load_matrix(const std::string& path) {
  auto in = open_in(path);
  expect_magic(in, "DDSH", path);
  const auto rows = read_pod<std::uint64_t>(in, path);
  const auto cols = read_pod<std::uint32_t>(in, path);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::uint64_t i = 0; i < rows; ++i)
    for (std::uint32_t j = 0; j < cols; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = read_pod<double>(in, path);
  return m;
}

void save_primitive_model(const std::string& path, const PrimitiveModel& model) {
  json j;
  j["channel_mask"] = model.channel_mask;
  json centers = json::array();
  for (Eigen::Index p = 0; p < model.centers.rows(); ++p) {
    json row = json::array();
    for (Eigen::Index c = 0; c < model.centers.cols(); ++c) row.push_back(model.centers(p, c));
    centers.push_back(std::move(row));
  }
  j["centers"] = centers;
  j["assignments"] = model.primitive_of_superpoint;
  j["coarse_labels"] = model.coarse_labels;
  j["zero_norm_rows"] = model.zero_norm_rows;
  write_text_file(path, j.dump(2) + "\n");
}

PrimitiveModel load_primitive_model(const std::string& path) {
  const json j = parse_json_file(path);
  PrimitiveModel model;
  try {
    model.channel_mask = j.at("channel_mask").get<std::vector<bool>>();
    const auto centers = j.at("centers");
    const Eigen::Index rows = static_cast<Eigen::Index>(centers.size());
    const Eigen::Index cols = rows > 0 ? static_cast<Eigen::Index>(centers[0].size()) : 0;
    model.centers.resize(rows, cols);
    for (Eigen::Index p = 0; p < rows; ++p)
      for (Eigen::Index c = 0; c < cols; ++c)
        model.centers(p, c) = centers[static_cast<std::size_t>(p)][static_cast<std::size_t>(c)]
                                  .get<double>();
    model.primitive_of_superpoint = j.at("assignments").get<std::vector<int>>();
    model.coarse_labels = j.at("coarse_labels").get<std::vector<int>>();
    model.zero_norm_rows = j.at("zero_norm_rows").get<int>();
  } catch (const json::exception& e) {
    throw IoError("malformed primitive model JSON in " + path + ": " + e.what());
  }
  return model;
}

std::string read_text_file(const std::string& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  auto out = open_out(path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failed: " + path);
}

std::string fnv1a_hex(const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= bytes[i];
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return std::string(buf);
}

}  // namespace dds
