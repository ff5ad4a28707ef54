#include "dds/superpoint.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>

#include "dds/errors.hpp"

namespace dds {

namespace {

std::array<std::int64_t, 3> voxel_key(const Eigen::Vector3d& p, double voxel_size) {
  return {static_cast<std::int64_t>(std::floor(p.x() / voxel_size)),
          static_cast<std::int64_t>(std::floor(p.y() / voxel_size)),
          static_cast<std::int64_t>(std::floor(p.z() / voxel_size))};
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

void SuperpointPartition::validate() const {
  if (count <= 0) throw Error("superpoint partition is empty");
  if (static_cast<int>(sizes.size()) != count) throw Error("superpoint size table mismatch");
  std::vector<int> recount(static_cast<std::size_t>(count), 0);
  for (int a : assignment) {
    if (a < 0 || a >= count) throw Error("superpoint assignment out of range");
    ++recount[static_cast<std::size_t>(a)];
  }
  for (int s : recount)
    if (s == 0) throw Error("superpoint partition contains an empty superpoint");
  if (recount != sizes) throw Error("superpoint sizes disagree with assignment");
}

SuperpointPartition oversegment(const PointCloud& cloud, const SegCfg& cfg) {
  cloud.validate();
  if (cfg.voxel_size <= 0.0 || cfg.growth_radius < 0.0)
    throw Error("invalid over-segmentation configuration");

  const Eigen::Index n = cloud.size();

  // Seed voxels ordered by key; std::map gives the lexicographic order.
  std::map<std::array<std::int64_t, 3>, std::vector<int>> voxels;
  for (Eigen::Index i = 0; i < n; ++i)
    voxels[voxel_key(cloud.positions.row(i), cfg.voxel_size)].push_back(static_cast<int>(i));

  SuperpointPartition out;
  out.assignment.assign(static_cast<std::size_t>(n), -1);

  const double r2 = cfg.growth_radius * cfg.growth_radius;
  for (const auto& [key, members] : voxels) {
    // Region growing inside the seed voxel: connected components under the
    // growth-radius adjacency. Growth never leaves the voxel, so halving the
    // voxel size can only refine the partition.
    const int k = static_cast<int>(members.size());
    UnionFind uf(k);
    for (int a = 0; a < k; ++a) {
      const Eigen::Vector3d pa = cloud.positions.row(members[static_cast<std::size_t>(a)]);
      for (int b = a + 1; b < k; ++b) {
        const Eigen::Vector3d pb = cloud.positions.row(members[static_cast<std::size_t>(b)]);
        if ((pa - pb).squaredNorm() <= r2) uf.unite(a, b);
      }
    }

    // Components ordered by their lexicographically smallest member
    // coordinate; this keeps the labeling independent of input order.
    std::map<int, std::vector<int>> comps;
    for (int a = 0; a < k; ++a) comps[uf.find(a)].push_back(members[static_cast<std::size_t>(a)]);

    std::vector<std::vector<int>> ordered;
    ordered.reserve(comps.size());
    for (auto& [root, pts] : comps) ordered.push_back(std::move(pts));
    auto min_coord = [&](const std::vector<int>& pts) {
      Eigen::Vector3d best = cloud.positions.row(pts.front());
      for (int i : pts) {
        const Eigen::Vector3d p = cloud.positions.row(i);
        if (std::tie(p.x(), p.y(), p.z()) < std::tie(best.x(), best.y(), best.z())) best = p;
      }
      return std::array<double, 3>{best.x(), best.y(), best.z()};
    };
    std::sort(ordered.begin(), ordered.end(),
              [&](const std::vector<int>& a, const std::vector<int>& b) {
                return min_coord(a) < min_coord(b);
              });

    for (const auto& comp : ordered) {
      const int label = out.count++;
      out.sizes.push_back(static_cast<int>(comp.size()));
      for (int i : comp) out.assignment[static_cast<std::size_t>(i)] = label;
    }
  }
  return out;
}

Eigen::MatrixXd pool_features(const SuperpointPartition& partition,
                              const Eigen::MatrixXd& point_features) {
  if (static_cast<Eigen::Index>(partition.assignment.size()) != point_features.rows())
    throw Error("partition and feature matrix disagree on point count");

  Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(partition.count, point_features.cols());
  for (std::size_t i = 0; i < partition.assignment.size(); ++i)
    pooled.row(partition.assignment[i]) += point_features.row(static_cast<Eigen::Index>(i));
  for (int s = 0; s < partition.count; ++s)
    pooled.row(s) /= static_cast<double>(partition.sizes[static_cast<std::size_t>(s)]);
  return pooled;
}

}  // namespace dds
