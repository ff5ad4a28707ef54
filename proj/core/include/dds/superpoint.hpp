#ifndef DDS_SUPERPOINT_HPP
#define DDS_SUPERPOINT_HPP

#include <Eigen/Dense>
#include <vector>

#include "dds/geometry.hpp"

namespace dds {

struct SegCfg {
  double voxel_size = 0.5;     // seed voxel edge, meters
  double growth_radius = 0.3;  // point adjacency radius, meters
};

/// Total partition of a point cloud: every point carries a superpoint index
/// in [0, count) and every superpoint is non-empty.
struct SuperpointPartition {
  std::vector<int> assignment;
  int count = 0;
  std::vector<int> sizes;

  void validate() const;
};

/// Voxel-seeded over-segmentation: points are bucketed into voxels of edge
/// `voxel_size` and each voxel splits into connected components under the
/// `growth_radius` adjacency. Superpoints are ordered by voxel key, then by
/// the lexicographically smallest member coordinate, so the partition is
/// independent of input point order.
SuperpointPartition oversegment(const PointCloud& cloud, const SegCfg& cfg = {});

/// Average pooling of point features per superpoint (rows of the result are
/// the superpoint features h_n). Summation runs in ascending point order.
Eigen::MatrixXd pool_features(const SuperpointPartition& partition,
                              const Eigen::MatrixXd& point_features);

}  // namespace dds

#endif
