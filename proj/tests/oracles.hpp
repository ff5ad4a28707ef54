// Brute-force reference implementations used by the unit and acceptance
// suites. Everything here is deliberately naive and independent of the
// library code paths it checks.

#ifndef DDS_TESTS_ORACLES_HPP
#define DDS_TESTS_ORACLES_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "dds/geometry.hpp"
#include "dds/teacher.hpp"

namespace oracles {

// ---------------------------------------------------------------- geometry

/// Projection via an explicit 3x4 homogeneous matrix P = K [R | t].
struct HomogeneousProjection {
  Eigen::Vector2d pixel;
  double depth;
  bool visible;
};

inline HomogeneousProjection project_homogeneous(const Eigen::Vector3d& p,
                                                 const dds::CameraModel& cam) {
  Eigen::Matrix<double, 3, 4> pm;
  pm.block<3, 3>(0, 0) = cam.intrinsics * cam.extrinsics.block<3, 3>(0, 0);
  pm.block<3, 1>(0, 3) = cam.intrinsics * cam.extrinsics.block<3, 1>(0, 3);
  const Eigen::Vector4d ph(p.x(), p.y(), p.z(), 1.0);
  const Eigen::Vector3d h = pm * ph;

  HomogeneousProjection out;
  out.depth = (cam.extrinsics * ph).z();
  out.pixel = h.head<2>() / h.z();
  out.visible = out.depth > 0.0 && out.pixel.x() >= 0.0 && out.pixel.x() < cam.width &&
                out.pixel.y() >= 0.0 && out.pixel.y() < cam.height;
  return out;
}

inline dds::CameraModel random_camera(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Eigen::Quaterniond q(uni(rng), uni(rng), uni(rng), uni(rng));
  while (q.norm() < 1e-3) q = Eigen::Quaterniond(uni(rng), uni(rng), uni(rng), uni(rng));
  q.normalize();

  dds::CameraModel cam;
  cam.width = 256;
  cam.height = 192;
  std::uniform_real_distribution<double> focal(80.0, 200.0);
  cam.intrinsics << focal(rng), 0, 127.5, 0, focal(rng), 95.5, 0, 0, 1;
  cam.extrinsics.setIdentity();
  cam.extrinsics.block<3, 3>(0, 0) = q.toRotationMatrix();
  cam.extrinsics.block<3, 1>(0, 3) = Eigen::Vector3d(uni(rng), uni(rng), uni(rng)) * 2.0;
  return cam;
}

// ------------------------------------------------------------ mask merging

/// Full lifted-mask pipeline on explicit point sets: canonical ordering,
/// fixpoint merge, size filter, overlap resolution, final size filter.
/// Mirrors the documented semantics end to end with naive set algebra.
struct TaggedMask {
  std::string label;
  std::set<int> points;
  int view = 0;
  int mask = 0;
};

struct SimpleGroups {
  std::vector<std::pair<std::string, std::vector<int>>> groups;
  std::vector<int> point_mask;
};

inline SimpleGroups lift_masks_bruteforce(std::vector<TaggedMask> masks, int num_points,
                                          double merge_iou, int min_points) {
  std::sort(masks.begin(), masks.end(), [](const TaggedMask& a, const TaggedMask& b) {
    if (a.points.size() != b.points.size()) return a.points.size() > b.points.size();
    if (a.view != b.view) return a.view < b.view;
    return a.mask < b.mask;
  });
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t i = 0; i < masks.size() && !merged; ++i)
      for (std::size_t j = i + 1; j < masks.size() && !merged; ++j) {
        if (masks[i].label != masks[j].label) continue;
        std::set<int> inter, uni;
        std::set_intersection(masks[i].points.begin(), masks[i].points.end(),
                              masks[j].points.begin(), masks[j].points.end(),
                              std::inserter(inter, inter.begin()));
        std::set_union(masks[i].points.begin(), masks[i].points.end(), masks[j].points.begin(),
                       masks[j].points.end(), std::inserter(uni, uni.begin()));
        if (uni.empty() ||
            static_cast<double>(inter.size()) / static_cast<double>(uni.size()) < merge_iou)
          continue;
        masks[i].points = uni;
        masks.erase(masks.begin() + static_cast<std::ptrdiff_t>(j));
        merged = true;
      }
  }
  std::erase_if(masks, [&](const TaggedMask& m) {
    return static_cast<int>(m.points.size()) < min_points;
  });

  // A shared point goes to the group with the larger pre-resolution size,
  // ties to the lower index.
  SimpleGroups out;
  out.point_mask.assign(static_cast<std::size_t>(num_points), -1);
  std::vector<int> claim(static_cast<std::size_t>(num_points), -1);
  for (std::size_t g = 0; g < masks.size(); ++g)
    for (int p : masks[g].points) {
      const int cur = claim[static_cast<std::size_t>(p)];
      if (cur < 0 || masks[g].points.size() > masks[static_cast<std::size_t>(cur)].points.size())
        claim[static_cast<std::size_t>(p)] = static_cast<int>(g);
    }
  for (std::size_t g = 0; g < masks.size(); ++g) {
    std::vector<int> resolved;
    for (int p = 0; p < num_points; ++p)
      if (claim[static_cast<std::size_t>(p)] == static_cast<int>(g)) resolved.push_back(p);
    if (static_cast<int>(resolved.size()) < min_points) continue;
    const int idx = static_cast<int>(out.groups.size());
    for (int p : resolved) out.point_mask[static_cast<std::size_t>(p)] = idx;
    out.groups.emplace_back(masks[g].label, std::move(resolved));
  }
  return out;
}

// ----------------------------------------------------------------- voting

/// n_{k,q} by three explicit loops.
inline Eigen::MatrixXi vote_counts_bruteforce(const std::vector<int>& cluster_of_point,
                                              const std::vector<std::vector<std::string>>& labels,
                                              const std::vector<std::string>& vocabulary,
                                              int num_clusters) {
  Eigen::MatrixXi counts =
      Eigen::MatrixXi::Zero(num_clusters, static_cast<int>(vocabulary.size()));
  for (int k = 0; k < num_clusters; ++k)
    for (std::size_t q = 0; q < vocabulary.size(); ++q)
      for (std::size_t i = 0; i < cluster_of_point.size(); ++i) {
        if (cluster_of_point[i] != k) continue;
        for (const auto& l : labels[i])
          if (l == vocabulary[q]) ++counts(k, static_cast<int>(q));
      }
  return counts;
}

/// Row argmax with threshold, scanning every column.
inline std::vector<int> assign_bruteforce(const Eigen::MatrixXd& ratios, double eta) {
  std::vector<int> out(static_cast<std::size_t>(ratios.rows()), -1);
  for (Eigen::Index k = 0; k < ratios.rows(); ++k) {
    int best = -1;
    double best_r = -1.0;
    for (Eigen::Index q = 0; q < ratios.cols(); ++q)
      if (ratios(k, q) > best_r) { best_r = ratios(k, q); best = static_cast<int>(q); }
    if (best >= 0 && best_r >= eta) out[static_cast<std::size_t>(k)] = best;
  }
  return out;
}

// --------------------------------------------------------------- matching

/// Exhaustive search over all one-to-one cluster-to-class assignments
/// (clusters pick distinct classes or none); returns the best achievable
/// total intersection. Feasible for clusters <= 6.
inline double best_total_intersection(const Eigen::MatrixXd& intersection) {
  const int kc = static_cast<int>(intersection.rows());
  const int nq = static_cast<int>(intersection.cols());
  std::vector<int> classes(static_cast<std::size_t>(nq));
  std::iota(classes.begin(), classes.end(), 0);

  double best = 0.0;
  // Every injective map from a subset of clusters to classes is covered by
  // iterating over permutations of class choices padded with "none".
  std::vector<int> choice(static_cast<std::size_t>(kc), -1);
  std::vector<bool> used(static_cast<std::size_t>(nq), false);
  const std::function<void(int, double)> recurse = [&](int k, double sum) {
    if (k == kc) { best = std::max(best, sum); return; }
    recurse(k + 1, sum);  // cluster k unmatched
    for (int q = 0; q < nq; ++q) {
      if (used[static_cast<std::size_t>(q)]) continue;
      used[static_cast<std::size_t>(q)] = true;
      recurse(k + 1, sum + intersection(k, q));
      used[static_cast<std::size_t>(q)] = false;
    }
  };
  recurse(0, 0.0);
  return best;
}

/// Metrics recomputed from an explicit cluster-to-class map with plain loops.
struct SimpleMetrics {
  double oacc = 0.0, macc = 0.0, miou = 0.0;
};

inline SimpleMetrics metrics_from_matching(const std::vector<int>& pred,
                                           const std::vector<int>& gt,
                                           const std::vector<int>& matching) {
  SimpleMetrics m;
  std::set<int> classes(gt.begin(), gt.end());
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (matching[static_cast<std::size_t>(pred[i])] == gt[i]) ++correct;
  m.oacc = static_cast<double>(correct) / static_cast<double>(gt.size());

  double acc_sum = 0.0, iou_sum = 0.0;
  for (int q : classes) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const bool p = matching[static_cast<std::size_t>(pred[i])] == q;
      const bool g = gt[i] == q;
      if (p && g) ++tp;
      else if (p) ++fp;
      else if (g) ++fn;
    }
    acc_sum += tp / (tp + fn);
    iou_sum += tp / (tp + fp + fn);
  }
  m.macc = acc_sum / static_cast<double>(classes.size());
  m.miou = iou_sum / static_cast<double>(classes.size());
  return m;
}

// ------------------------------------------------------------- superpoints

/// Voxel bucketing: the partition a pure floor-grid would produce, keyed by
/// the voxel index triple.
inline std::map<std::array<std::int64_t, 3>, std::vector<int>> voxel_buckets(
    const dds::PointCloud& cloud, double voxel) {
  std::map<std::array<std::int64_t, 3>, std::vector<int>> buckets;
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d p = cloud.positions.row(i);
    buckets[{static_cast<std::int64_t>(std::floor(p.x() / voxel)),
             static_cast<std::int64_t>(std::floor(p.y() / voxel)),
             static_cast<std::int64_t>(std::floor(p.z() / voxel))}]
        .push_back(static_cast<int>(i));
  }
  return buckets;
}

// ---------------------------------------------------------------- graphs

/// Affinity, normalized adjacency, and Laplacian by scalar double loops.
struct DenseGraph {
  Eigen::MatrixXd a, a_tilde, laplacian;
};

inline DenseGraph graph_bruteforce(const Eigen::MatrixXd& f) {
  const Eigen::Index n = f.rows();
  DenseGraph g;
  g.a.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      double d2 = 0.0;
      for (Eigen::Index c = 0; c < f.cols(); ++c) {
        const double diff = f(i, c) - f(j, c);
        d2 += diff * diff;
      }
      g.a(i, j) = std::exp(-d2 / static_cast<double>(f.cols()));
    }
  g.a_tilde.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      g.a_tilde(i, j) = g.a(i, j) / std::sqrt(g.a.row(i).sum() * g.a.row(j).sum());
  g.laplacian = Eigen::MatrixXd::Identity(n, n) - g.a_tilde;
  return g;
}

// ------------------------------------------------------------- randomness

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng,
                                     double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

inline dds::PointCloud random_cloud(Eigen::Index n, std::mt19937_64& rng, double extent = 5.0) {
  std::uniform_real_distribution<double> uni(-extent, extent);
  dds::PointCloud cloud;
  cloud.positions.resize(n, 3);
  for (Eigen::Index i = 0; i < n; ++i)
    cloud.positions.row(i) << uni(rng), uni(rng), uni(rng);
  return cloud;
}

}  // namespace oracles

#endif
