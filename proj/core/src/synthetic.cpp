#include "dds/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <random>

#include <json.hpp>

#include "dds/errors.hpp"
#include "dds/io.hpp"

namespace dds {

namespace {

using json = nlohmann::json;

Eigen::Vector3d sample_box_surface(const Eigen::Vector3d& half, std::mt19937_64& rng) {
  const double ax = half.y() * half.z();  // +-x faces
  const double ay = half.x() * half.z();
  const double az = half.x() * half.y();
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double pick = uni(rng) * (ax + ay + az);
  std::uniform_real_distribution<double> sgn(0.0, 1.0);
  const double side = sgn(rng) < 0.5 ? -1.0 : 1.0;
  const double u = uni(rng) * 2.0 - 1.0;
  const double v = uni(rng) * 2.0 - 1.0;
  if (pick < ax) return {side * half.x(), u * half.y(), v * half.z()};
  if (pick < ax + ay) return {u * half.x(), side * half.y(), v * half.z()};
  return {u * half.x(), v * half.y(), side * half.z()};
}

Eigen::Vector3d sample_cylinder_surface(double radius, double half_h, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double lateral = 2.0 * std::numbers::pi * radius * (2.0 * half_h);
  const double caps = 2.0 * std::numbers::pi * radius * radius;
  const double pick = uni(rng) * (lateral + caps);
  const double theta = uni(rng) * 2.0 * std::numbers::pi;
  if (pick < lateral) {
    const double z = (uni(rng) * 2.0 - 1.0) * half_h;
    return {radius * std::cos(theta), radius * std::sin(theta), z};
  }
  const double r = radius * std::sqrt(uni(rng));
  const double z = uni(rng) < 0.5 ? -half_h : half_h;
  return {r * std::cos(theta), r * std::sin(theta), z};
}

Eigen::Vector3d sample_plane_surface(const Eigen::Vector3d& half, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  return {uni(rng) * half.x(), uni(rng) * half.y(), 0.0};
}

CameraModel ring_camera(const CameraRingSpec& ring, int index) {
  const double angle = 2.0 * std::numbers::pi * index / ring.count;
  const Eigen::Vector3d eye(ring.radius * std::cos(angle), ring.radius * std::sin(angle),
                            ring.height);
  const Eigen::Vector3d target = Eigen::Vector3d::Zero();

  const Eigen::Vector3d forward = (target - eye).normalized();
  Eigen::Vector3d right = forward.cross(Eigen::Vector3d::UnitZ());
  if (right.norm() < 1e-9) right = Eigen::Vector3d::UnitX();
  right.normalize();
  const Eigen::Vector3d down = forward.cross(right);

  CameraModel cam;
  cam.width = ring.image_width;
  cam.height = ring.image_height;
  cam.intrinsics << ring.focal, 0, (ring.image_width - 1) / 2.0,
                    0, ring.focal, (ring.image_height - 1) / 2.0,
                    0, 0, 1;
  Eigen::Matrix3d rot;
  rot.row(0) = right.transpose();
  rot.row(1) = down.transpose();
  rot.row(2) = forward.transpose();
  cam.extrinsics.setIdentity();
  cam.extrinsics.block<3, 3>(0, 0) = rot;
  cam.extrinsics.block<3, 1>(0, 3) = -rot * eye;
  return cam;
}

/// Morphological erosion with a square structuring element of the given
/// radius; pixels on the image border survive only if their in-bounds
/// neighborhood is full.
std::vector<std::int64_t> erode_pixels(const std::vector<std::int64_t>& pixels, int width,
                                       int height, int radius) {
  if (radius <= 0 || pixels.empty()) return pixels;
  std::vector<std::uint8_t> in(static_cast<std::size_t>(width) * height, 0);
  for (std::int64_t p : pixels) in[static_cast<std::size_t>(p)] = 1;
  std::vector<std::int64_t> out;
  for (std::int64_t p : pixels) {
    const int u = static_cast<int>(p % width);
    const int v = static_cast<int>(p / width);
    bool keep = true;
    for (int dv = -radius; dv <= radius && keep; ++dv) {
      for (int du = -radius; du <= radius && keep; ++du) {
        const int uu = u + du;
        const int vv = v + dv;
        if (uu < 0 || uu >= width || vv < 0 || vv >= height ||
            in[static_cast<std::size_t>(vv) * width + uu] == 0)
          keep = false;
      }
    }
    if (keep) out.push_back(p);
  }
  return out;
}

}  // namespace

void SyntheticSceneSpec::validate() const {
  if (objects.empty()) throw Error("scene needs at least one object");
  if (class_names.empty()) throw Error("scene needs class names");
  for (const auto& obj : objects)
    if (obj.class_id < 0 || obj.class_id >= static_cast<int>(class_names.size()))
      throw Error("object class id out of range");
  if (archetypes.rows() > 0) {
    if (archetypes.rows() != static_cast<Eigen::Index>(class_names.size()) ||
        archetypes.cols() != feature_channels)
      throw Error("archetype matrix shape must be classes x channels");
    for (Eigen::Index a = 0; a < archetypes.rows(); ++a) {
      if (std::abs(archetypes.row(a).norm() - 1.0) > 1e-9)
        throw Error("archetypes must be unit vectors");
      for (Eigen::Index b = a + 1; b < archetypes.rows(); ++b)
        if (archetypes.row(a).dot(archetypes.row(b)) > 0.5 + 1e-12)
          throw Error("archetype pairwise cosine must stay at or below 0.5");
    }
  }
}

SyntheticScene generate_scene(const SyntheticSceneSpec& spec_in, std::uint64_t seed) {
  SyntheticSceneSpec spec = spec_in;
  const int num_classes = static_cast<int>(spec.class_names.size());
  if (spec.archetypes.rows() == 0) {
    if (spec.feature_channels < num_classes)
      throw Error("default archetypes need at least one channel per class");
    spec.archetypes = Eigen::MatrixXd::Zero(num_classes, spec.feature_channels);
    for (int c = 0; c < num_classes; ++c) spec.archetypes(c, c) = 1.0;  // orthogonal
  }
  spec.validate();

  std::mt19937_64 rng(seed);
  SyntheticScene scene;
  scene.class_names = spec.class_names;
  scene.feature_channels = spec.feature_channels;

  // Surface-sampled points, object by object in spec order.
  std::int64_t total = 0;
  for (const auto& obj : spec.objects) total += obj.num_points;
  scene.cloud.positions.resize(total, 3);
  scene.cloud.gt_class.resize(static_cast<std::size_t>(total));
  std::vector<int> object_of_point(static_cast<std::size_t>(total));
  Eigen::Index row = 0;
  for (std::size_t o = 0; o < spec.objects.size(); ++o) {
    const auto& obj = spec.objects[o];
    for (int i = 0; i < obj.num_points; ++i, ++row) {
      Eigen::Vector3d local;
      switch (obj.shape) {
        case ObjectSpec::Shape::Box: local = sample_box_surface(obj.half_extent, rng); break;
        case ObjectSpec::Shape::Cylinder:
          local = sample_cylinder_surface(obj.half_extent.x(), obj.half_extent.z(), rng);
          break;
        case ObjectSpec::Shape::Plane: local = sample_plane_surface(obj.half_extent, rng); break;
      }
      scene.cloud.positions.row(row) = (obj.center + local).transpose();
      scene.cloud.gt_class[static_cast<std::size_t>(row)] = obj.class_id;
      object_of_point[static_cast<std::size_t>(row)] = static_cast<int>(o);
    }
  }

  for (int v = 0; v < spec.ring.count; ++v) scene.cameras.push_back(ring_camera(spec.ring, v));

  // Per view: depth-resolved footprint ownership, then archetype painting
  // and per-object masks.
  const int w = spec.ring.image_width;
  const int h = spec.ring.image_height;
  std::normal_distribution<double> noise(0.0, spec.feature_noise_sigma);
  for (const auto& cam : scene.cameras) {
    const auto proj = project_cloud(scene.cloud, cam);

    std::vector<int> owner(static_cast<std::size_t>(w) * h, -1);
    std::vector<double> depth(static_cast<std::size_t>(w) * h,
                              std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < proj.size(); ++i) {
      if (!proj[i].visible) continue;
      const Eigen::Vector2i q = nearest_pixel(proj[i].pixel, w, h);
      for (int dv = -spec.splat_radius; dv <= spec.splat_radius; ++dv) {
        for (int du = -spec.splat_radius; du <= spec.splat_radius; ++du) {
          if (du * du + dv * dv > spec.splat_radius * spec.splat_radius) continue;
          const int uu = q.x() + du;
          const int vv = q.y() + dv;
          if (uu < 0 || uu >= w || vv < 0 || vv >= h) continue;
          const std::size_t pix = static_cast<std::size_t>(vv) * w + uu;
          const int obj = object_of_point[i];
          // Frontmost object wins a contested pixel; ties go to the lower
          // object index.
          if (proj[i].depth < depth[pix] ||
              (proj[i].depth == depth[pix] && obj < owner[pix])) {
            depth[pix] = proj[i].depth;
            owner[pix] = obj;
          }
        }
      }
    }

    ViewFeatureMap fmap;
    fmap.channels = spec.feature_channels;
    fmap.height = h;
    fmap.width = w;
    fmap.values.assign(static_cast<std::size_t>(spec.feature_channels) * w * h, 0.0f);
    for (int vv = 0; vv < h; ++vv) {
      for (int uu = 0; uu < w; ++uu) {
        const std::size_t pix = static_cast<std::size_t>(vv) * w + uu;
        if (owner[pix] < 0) continue;
        const int cls = spec.objects[static_cast<std::size_t>(owner[pix])].class_id;
        for (int c = 0; c < spec.feature_channels; ++c) {
          double value = spec.archetypes(cls, c);
          if (spec.feature_noise_sigma > 0.0) value += noise(rng);
          fmap.values[(static_cast<std::size_t>(c) * h + vv) * w + uu] =
              static_cast<float>(value);
        }
      }
    }
    scene.features.push_back(std::move(fmap));

    ViewMaskSet maskset;
    for (std::size_t o = 0; o < spec.objects.size(); ++o) {
      std::vector<std::int64_t> pixels;
      for (std::size_t pix = 0; pix < owner.size(); ++pix)
        if (owner[pix] == static_cast<int>(o)) pixels.push_back(static_cast<std::int64_t>(pix));
      pixels = erode_pixels(pixels, w, h, spec.mask_erosion);
      if (pixels.empty()) continue;
      maskset.masks.push_back(
          {spec.class_names[static_cast<std::size_t>(spec.objects[o].class_id)],
           std::move(pixels)});
    }
    scene.masks.push_back(std::move(maskset));
  }
  return scene;
}

SyntheticSceneSpec canonical_scene_spec(double sigma, int cameras, int channels,
                                        double points_scale) {
  SyntheticSceneSpec spec;
  spec.class_names = {"car", "pedestrian", "vegetation", "building"};
  spec.feature_channels = channels;
  spec.feature_noise_sigma = sigma;
  spec.ring.count = cameras;

  const auto points = [&](int base) { return std::max(50, static_cast<int>(base * points_scale)); };
  spec.objects = {
      {ObjectSpec::Shape::Box, {4.0, 0.5, 0.8}, {2.0, 0.9, 0.8}, 0, points(2000)},
      {ObjectSpec::Shape::Cylinder, {-2.5, 3.5, 0.9}, {0.4, 0.4, 0.9}, 1, points(1200)},
      {ObjectSpec::Shape::Cylinder, {-4.0, -3.0, 1.5}, {1.2, 1.2, 1.5}, 2, points(2400)},
      {ObjectSpec::Shape::Box, {0.5, -6.0, 2.5}, {3.0, 1.5, 2.5}, 3, points(3000)},
  };
  return spec;
}

void save_scene(const std::string& dir, const SyntheticScene& scene) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  save_point_cloud((fs::path(dir) / "cloud.ddsp").string(), scene.cloud);
  for (std::size_t v = 0; v < scene.cameras.size(); ++v) {
    char name[64];
    std::snprintf(name, sizeof(name), "view_%03zu", v);
    const std::string stem = (fs::path(dir) / name).string();
    save_camera(stem + ".camera.json", scene.cameras[v]);
    save_feature_map(stem + ".features.ddsf", scene.features[v]);
    save_mask_set(stem + ".masks.json", scene.masks[v], scene.cameras[v].width,
                  scene.cameras[v].height);
  }
  json meta;
  meta["class_names"] = scene.class_names;
  meta["channels"] = scene.feature_channels;
  meta["num_views"] = scene.cameras.size();
  write_text_file((fs::path(dir) / "scene_meta.json").string(), meta.dump(2) + "\n");
}

SyntheticScene load_scene(const std::string& dir) {
  namespace fs = std::filesystem;
  SyntheticScene scene;
  json meta;
  try {
    meta = json::parse(read_text_file((fs::path(dir) / "scene_meta.json").string()));
    scene.class_names = meta.at("class_names").get<std::vector<std::string>>();
    scene.feature_channels = meta.at("channels").get<int>();
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed scene_meta.json: ") + e.what());
  }
  const auto num_views = meta.at("num_views").get<std::size_t>();
  scene.cloud = load_point_cloud((fs::path(dir) / "cloud.ddsp").string());
  for (std::size_t v = 0; v < num_views; ++v) {
    char name[64];
    std::snprintf(name, sizeof(name), "view_%03zu", v);
    const std::string stem = (fs::path(dir) / name).string();
    scene.cameras.push_back(load_camera(stem + ".camera.json"));
    scene.features.push_back(load_feature_map(stem + ".features.ddsf"));
    scene.masks.push_back(load_mask_set(stem + ".masks.json", scene.cameras.back().width,
                                        scene.cameras.back().height));
  }
  return scene;
}

}  // namespace dds
