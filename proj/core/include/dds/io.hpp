#ifndef DDS_IO_HPP
#define DDS_IO_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "dds/cluster.hpp"
#include "dds/geometry.hpp"
#include "dds/superpoint.hpp"
#include "dds/teacher.hpp"

namespace dds {

// Binary formats are little-endian. Magics: "DDSP" point clouds, "DDSF"
// feature tensors, "DDSS" superpoint partitions, "DDST" teacher caches,
// "DDSH" plain f64 matrices.

void save_point_cloud(const std::string& path, const PointCloud& cloud);
PointCloud load_point_cloud(const std::string& path);

void save_camera(const std::string& path, const CameraModel& cam);
CameraModel load_camera(const std::string& path);

void save_feature_map(const std::string& path, const ViewFeatureMap& map);
ViewFeatureMap load_feature_map(const std::string& path);

/// Masks are stored per view as JSON {"masks": [{"label", "rle"}]} where rle
/// is a flat [start, length, ...] run list over row-major linear pixels with
/// strictly increasing, non-overlapping runs.
void save_mask_set(const std::string& path, const ViewMaskSet& masks, int width, int height);
ViewMaskSet load_mask_set(const std::string& path, int width, int height);

std::vector<std::int64_t> rle_decode(const std::vector<std::int64_t>& runs);
std::vector<std::int64_t> rle_encode(const std::vector<std::int64_t>& pixels);

void save_partition(const std::string& path, const SuperpointPartition& partition);
SuperpointPartition load_partition(const std::string& path);

void save_teacher(const std::string& path, const TeacherField& field);
TeacherField load_teacher(const std::string& path);

/// Row-major f64 matrix, used for cached intermediate features.
void save_matrix(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd load_matrix(const std::string& path);

void save_primitive_model(const std::string& path, const PrimitiveModel& model);
PrimitiveModel load_primitive_model(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

/// FNV-1a over a byte buffer, reported as 16 hex digits; used to tag stage
/// inputs in error messages.
std::string fnv1a_hex(const void* data, std::size_t size);

}  // namespace dds

#endif
