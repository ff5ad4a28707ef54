#ifndef DDS_TEACHER_HPP
#define DDS_TEACHER_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dds/geometry.hpp"

namespace dds {

/// Dense per-view 2D feature map, C x H x W row-major (channel-major).
struct ViewFeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> values;  // channels * height * width

  float at(int c, int v, int u) const {
    return values[(static_cast<std::size_t>(c) * height + v) * width + u];
  }
  /// Feature column at one pixel.
  Eigen::VectorXd sample(int u, int v) const;

  void validate() const;
};

/// Labeled 2D masks for one view. Pixels are stored as sorted unique linear
/// indices (v * width + u) over the owning camera's row-major grid.
struct ViewMaskSet {
  struct Mask {
    std::string label;
    std::vector<std::int64_t> pixels;
  };
  std::vector<Mask> masks;
};

/// Per-point aggregated teacher features plus visibility bookkeeping.
struct TeacherField {
  Eigen::MatrixXd features;     // N x C, all-zero rows for invisible points
  std::vector<bool> visible;    // point visible in at least one view
  std::vector<int> view_counts; // number of views the point is visible in

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index channels() const { return features.cols(); }
};

/// Valid 3D mask family: disjoint point-index groups with one label each and
/// the per-point group index (-1 when the point belongs to no group).
struct MaskGroups {
  struct Group {
    std::string label;
    std::vector<int> points;  // ascending point indices
  };
  std::vector<Group> groups;
  std::vector<int> point_mask;  // length N, values in {-1, 0..M-1}
};

struct MaskMergeConfig {
  double merge_iou = 0.5;   // same-label masks merge at or above this IoU
  int min_mask_points = 10; // smaller groups are discarded
};

/// Multi-view teacher aggregation: t_i = sum_v d_i f_i / (sum_v d_i + eps).
/// Throws MismatchedChannels if views disagree on C.
TeacherField build_teacher(const PointCloud& cloud,
                           const std::vector<std::pair<CameraModel, ViewFeatureMap>>& views,
                           int threads = 1, double eps = 1e-8);

/// Lifts per-view 2D masks to 3D point sets, merges same-label masks across
/// views by point-set IoU, filters undersized groups, and resolves overlaps
/// so the per-point group index is single-valued.
MaskGroups lift_masks(const PointCloud& cloud,
                      const std::vector<std::pair<CameraModel, ViewMaskSet>>& views,
                      const MaskMergeConfig& cfg = {}, int threads = 1);

/// Candidate visual label multiset per point: every valid (size-filtered)
/// per-view lifted mask containing the point contributes its label once.
/// Used for inference-time semantic voting; per-view masks are NOT merged.
std::vector<std::vector<std::string>> collect_point_labels(
    const PointCloud& cloud, const std::vector<std::pair<CameraModel, ViewMaskSet>>& views,
    const MaskMergeConfig& cfg = {}, int threads = 1);

}  // namespace dds

#endif
