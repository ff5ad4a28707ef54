#include "dds/geometry.hpp"

#include <cmath>

#include "dds/errors.hpp"
#include "dds/parallel.hpp"

namespace dds {

void PointCloud::validate() const {
  if (positions.rows() < 1) throw Error("point cloud must contain at least one point");
  if (!positions.allFinite()) throw Error("point cloud contains non-finite coordinates");
  if (!gt_class.empty() && static_cast<Eigen::Index>(gt_class.size()) != positions.rows())
    throw Error("gt_class length does not match point count");
}

void CameraModel::validate() const {
  if (intrinsics(0, 0) <= 0.0 || intrinsics(1, 1) <= 0.0)
    throw Error("camera intrinsics must have positive focal entries");
  if (width <= 0 || height <= 0) throw Error("camera resolution must be positive");
  const Eigen::Matrix3d r = extrinsics.block<3, 3>(0, 0);
  if ((r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-6)
    throw Error("extrinsics rotation block is not orthonormal within 1e-6");
  const Eigen::RowVector4d bottom = extrinsics.row(3);
  if ((bottom - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > 1e-9)
    throw Error("extrinsics bottom row must be (0,0,0,1)");
}

Projection project_point(const Eigen::Vector3d& p, const CameraModel& cam) {
  Projection out;
  const Eigen::Vector3d pc =
      cam.extrinsics.block<3, 3>(0, 0) * p + cam.extrinsics.block<3, 1>(0, 3);
  out.depth = pc.z();
  const Eigen::Vector3d h = cam.intrinsics * pc;
  if (h.z() != 0.0) {
    out.pixel = h.head<2>() / h.z();
  } else {
    out.pixel.setZero();  // degenerate depth; never visible
  }
  out.visible = out.depth > 0.0 && h.z() != 0.0 && out.pixel.x() >= 0.0 &&
                out.pixel.x() < static_cast<double>(cam.width) && out.pixel.y() >= 0.0 &&
                out.pixel.y() < static_cast<double>(cam.height);
  return out;
}

std::vector<Projection> project_cloud(const PointCloud& cloud, const CameraModel& cam,
                                      int threads) {
  std::vector<Projection> out(static_cast<std::size_t>(cloud.size()));
  parallel_for(cloud.size(), threads, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i)
      out[static_cast<std::size_t>(i)] = project_point(cloud.positions.row(i), cam);
  });
  return out;
}

}  // namespace dds
