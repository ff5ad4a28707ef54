#ifndef DDS_SYNTHETIC_HPP
#define DDS_SYNTHETIC_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "dds/geometry.hpp"
#include "dds/teacher.hpp"

namespace dds {

/// One surface-sampled object template.
struct ObjectSpec {
  enum class Shape { Box, Cylinder, Plane };
  Shape shape = Shape::Box;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  // Box: half extents. Cylinder: x = radius, z = half height (axis +z).
  // Plane: half extents in x/y, zero thickness.
  Eigen::Vector3d half_extent = Eigen::Vector3d::Ones();
  int class_id = 0;
  int num_points = 1000;
};

// Steep downward viewpoints keep XY-separated objects from occluding each
// other in image space; visibility is frustum-only, so feature sampling
// relies on the scene controlling occlusion.
struct CameraRingSpec {
  int count = 6;
  double radius = 10.0;
  double height = 16.0;
  int image_width = 192;
  int image_height = 144;
  double focal = 150.0;
};

/// Desk-scale scene recipe: surface-sampled objects, per-class feature
/// archetypes painted into each view, instance masks from the projected
/// footprints.
struct SyntheticSceneSpec {
  std::vector<ObjectSpec> objects;
  std::vector<std::string> class_names;
  int feature_channels = 16;
  double feature_noise_sigma = 0.05;
  CameraRingSpec ring;
  int splat_radius = 2;   // pixels painted around each projected point
  int mask_erosion = 1;   // boundary erosion radius on emitted masks
  Eigen::MatrixXd archetypes;  // one unit row per class; autogenerated if empty

  /// Throws Error unless archetypes are unit rows with pairwise cosine <= 0.5
  /// and at least one object exists.
  void validate() const;
};

struct SyntheticScene {
  PointCloud cloud;  // carries gt_class
  std::vector<CameraModel> cameras;
  std::vector<ViewFeatureMap> features;
  std::vector<ViewMaskSet> masks;
  std::vector<std::string> class_names;
  int feature_channels = 0;
};

/// Deterministic scene synthesis: samples points on object surfaces, renders
/// per-view feature maps by painting each object's archetype (plus Gaussian
/// noise) into its projected footprint with painter's-algorithm depth
/// ownership, and emits one eroded instance mask per object per view.
SyntheticScene generate_scene(const SyntheticSceneSpec& spec, std::uint64_t seed);

/// The stock four-object scene used across tests and the CLI.
SyntheticSceneSpec canonical_scene_spec(double sigma = 0.05, int cameras = 6, int channels = 16,
                                        double points_scale = 1.0);

/// Writes cloud.ddsp, per-view camera/feature/mask files, and scene_meta.json
/// into `dir` (created if missing).
void save_scene(const std::string& dir, const SyntheticScene& scene);

/// Loads a scene directory written by save_scene.
SyntheticScene load_scene(const std::string& dir);

}  // namespace dds

#endif
