#ifndef DDS_GEOMETRY_HPP
#define DDS_GEOMETRY_HPP

#include <Eigen/Dense>
#include <vector>

namespace dds {

/// Point cloud with optional per-point ground-truth class ids.
/// Ground truth is carried for evaluation only and never feeds a stage.
struct PointCloud {
  Eigen::MatrixX3d positions;   // N x 3, meters
  std::vector<int> gt_class;    // empty when absent, else length N

  Eigen::Index size() const { return positions.rows(); }
  bool has_gt() const { return !gt_class.empty(); }

  /// Throws Error if N < 1, coordinates are non-finite, or gt length differs.
  void validate() const;
};

/// Pinhole camera: intrinsics in pixels, world-to-camera rigid extrinsics.
struct CameraModel {
  Eigen::Matrix3d intrinsics = Eigen::Matrix3d::Identity();
  Eigen::Matrix4d extrinsics = Eigen::Matrix4d::Identity();
  int width = 0;
  int height = 0;

  /// Throws Error on non-positive focal entries or a rotation block that is
  /// not orthonormal within 1e-6.
  void validate() const;
};

/// Result of projecting one 3D point into one view. The pixel is continuous
/// and is reported even for invisible points.
struct Projection {
  Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
  double depth = 0.0;   // camera-frame z, meters
  bool visible = false; // depth > 0 and pixel inside [0,w) x [0,h)
};

Projection project_point(const Eigen::Vector3d& p, const CameraModel& cam);

/// Element-wise project_point over the whole cloud.
std::vector<Projection> project_cloud(const PointCloud& cloud, const CameraModel& cam,
                                      int threads = 1);

/// Nearest-neighbor pixel lookup, pixel centers at integer coordinates.
/// The result is clamped into [0,w-1] x [0,h-1] so that sampling a feature
/// grid at a visible projection is always in bounds.
inline Eigen::Vector2i nearest_pixel(const Eigen::Vector2d& pixel, int w, int h) {
  const auto clamp = [](double x, int hi) {
    const long long r = std::llround(x);
    if (r < 0) return 0;
    if (r > hi) return hi;
    return static_cast<int>(r);
  };
  return {clamp(pixel.x(), w - 1), clamp(pixel.y(), h - 1)};
}

}  // namespace dds

#endif
