#include "dds/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "dds/diffusion.hpp"
#include "dds/errors.hpp"
#include "dds/parallel.hpp"

namespace dds {

namespace {

constexpr int kLloydMaxIters = 100;
constexpr double kNormFloor = 1e-12;

int nearest_center(const Eigen::MatrixXd& centers, const Eigen::RowVectorXd& row, int k,
                   double* dist2_out) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int c = 0; c < k; ++c) {
    const double d = (centers.row(c) - row).squaredNorm();
    if (d < best_d) {  // equidistant rows stay with the lowest center index
      best_d = d;
      best = c;
    }
  }
  if (dist2_out) *dist2_out = best_d;
  return best;
}

KMeansResult lloyd_once(const Eigen::MatrixXd& rows, int k, std::uint64_t seed) {
  const Eigen::Index n = rows.rows();
  const Eigen::Index d = rows.cols();
  std::mt19937_64 rng(seed);

  // k-means++ seeding; the cumulative-sum walk keeps the draw deterministic
  // for a given RNG stream.
  Eigen::MatrixXd centers(k, d);
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  centers.row(0) = rows.row(first(rng));
  Eigen::VectorXd dist2(n);
  for (Eigen::Index i = 0; i < n; ++i) dist2[i] = (rows.row(i) - centers.row(0)).squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = dist2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> uni(0.0, total);
      const double target = uni(rng);
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += dist2[i];
        if (acc >= target) { pick = i; break; }
        pick = i;
      }
    } else {
      pick = first(rng);  // all remaining rows coincide with a chosen center
    }
    centers.row(c) = rows.row(pick);
    for (Eigen::Index i = 0; i < n; ++i)
      dist2[i] = std::min(dist2[i], (rows.row(i) - centers.row(c)).squaredNorm());
  }

  KMeansResult res;
  res.labels.assign(static_cast<std::size_t>(n), 0);
  std::vector<int> counts(static_cast<std::size_t>(k), 0);

  for (int iter = 0; iter < kLloydMaxIters; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int c = nearest_center(centers, rows.row(i), k, nullptr);
      if (c != res.labels[static_cast<std::size_t>(i)]) {
        res.labels[static_cast<std::size_t>(i)] = c;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;

    centers.setZero();
    std::fill(counts.begin(), counts.end(), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      centers.row(res.labels[static_cast<std::size_t>(i)]) += rows.row(i);
      ++counts[static_cast<std::size_t>(res.labels[static_cast<std::size_t>(i)])];
    }

    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centers.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
        continue;
      }
      // Empty cluster: split the largest cluster by moving its farthest
      // member, unless that cluster is a pile of duplicates.
      int donor = static_cast<int>(std::distance(
          counts.begin(), std::max_element(counts.begin(), counts.end())));
      Eigen::RowVectorXd donor_mean = Eigen::RowVectorXd::Zero(d);
      for (Eigen::Index i = 0; i < n; ++i)
        if (res.labels[static_cast<std::size_t>(i)] == donor) donor_mean += rows.row(i);
      donor_mean /= static_cast<double>(counts[static_cast<std::size_t>(donor)]);

      Eigen::Index far = -1;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (res.labels[static_cast<std::size_t>(i)] != donor) continue;
        const double dd = (rows.row(i) - donor_mean).squaredNorm();
        if (dd > far_d) { far_d = dd; far = i; }
      }
      if (far_d <= kNormFloor) {
        centers.row(c) = donor_mean;  // duplicates; leave the cluster empty
        continue;
      }
      res.labels[static_cast<std::size_t>(far)] = c;
      --counts[static_cast<std::size_t>(donor)];
      ++counts[static_cast<std::size_t>(c)];
      centers.row(c) = rows.row(far);
      centers.row(donor) = donor_mean;
    }
  }

  res.wcss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    res.wcss += (rows.row(i) - centers.row(res.labels[static_cast<std::size_t>(i)])).squaredNorm();
  res.centers = std::move(centers);
  return res;
}

}  // namespace

std::pair<Eigen::MatrixXd, std::vector<bool>> select_channels(const Eigen::MatrixXd& features,
                                                              double energy_ratio) {
  if (features.rows() < 2) throw Error("channel selection needs at least two rows");
  if (energy_ratio <= 0.0 || energy_ratio > 1.0) throw Error("energy_ratio must lie in (0,1]");

  const Eigen::Index c = features.cols();
  const Eigen::RowVectorXd mean = features.colwise().mean();
  Eigen::VectorXd variance(c);
  for (Eigen::Index j = 0; j < c; ++j)
    variance[j] = (features.col(j).array() - mean[j]).square().sum() /
                  static_cast<double>(features.rows());

  std::vector<Eigen::Index> order(static_cast<std::size_t>(c));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return variance[a] > variance[b]; });

  const double total = variance.sum();
  std::vector<bool> mask(static_cast<std::size_t>(c), false);
  double acc = 0.0;
  Eigen::Index kept = 0;
  for (Eigen::Index j : order) {
    if (acc >= energy_ratio * total) break;
    mask[static_cast<std::size_t>(j)] = true;
    acc += variance[j];
    ++kept;
  }
  if (kept == 0) {  // all-constant features: keep the first channel
    mask[0] = true;
    kept = 1;
  }

  Eigen::MatrixXd reduced(features.rows(), kept);
  Eigen::Index col = 0;
  for (Eigen::Index j = 0; j < c; ++j)
    if (mask[static_cast<std::size_t>(j)]) reduced.col(col++) = features.col(j);
  return {std::move(reduced), std::move(mask)};
}

KMeansResult kmeans(const Eigen::MatrixXd& rows, int k, std::uint64_t seed, int restarts,
                    int threads) {
  if (k < 1) throw Error("k must be positive");
  if (rows.rows() < k) throw DegenerateData("fewer rows than requested clusters");
  if (restarts < 1) throw Error("restarts must be positive");

  // Restarts are independent; selection scans them in index order.
  std::vector<KMeansResult> runs(static_cast<std::size_t>(restarts));
  parallel_for(restarts, threads, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t r = begin; r < end; ++r)
      runs[static_cast<std::size_t>(r)] =
          lloyd_once(rows, k, seed + 1000003ULL * static_cast<std::uint64_t>(r));
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r)
    if (runs[r].wcss < runs[best].wcss) best = r;
  return std::move(runs[best]);
}

PrimitiveModel fit_primitives(const Eigen::MatrixXd& diffused, const ClusterCfg& cfg,
                              int threads) {
  const Eigen::Index n = diffused.rows();
  if (cfg.k_primitive < 1) throw Error("k_primitive must be positive");
  if (n < cfg.k_primitive) throw DegenerateData("fewer superpoints than primitives");

  PrimitiveModel model;
  Eigen::MatrixXd reduced;
  if (n >= 2) {
    std::tie(reduced, model.channel_mask) = select_channels(diffused, cfg.energy_ratio);
  } else {
    reduced = diffused;
    model.channel_mask.assign(static_cast<std::size_t>(diffused.cols()), true);
  }

  // Coarse grouping, recorded for inspection only; it never feeds the
  // primitive stage.
  const int k_coarse = std::min<int>(cfg.k_coarse, static_cast<int>(n));
  model.coarse_labels = kmeans(reduced, k_coarse, cfg.seed, cfg.restarts, threads).labels;

  const int d_e = std::min<Eigen::Index>(cfg.embed_dims, std::min(reduced.rows(), reduced.cols()));
  const Eigen::MatrixXd embedding = pca_baseline(reduced, d_e);
  KMeansResult prim = kmeans(embedding, cfg.k_primitive, cfg.seed + 1, cfg.restarts, threads);

  // Primitive centers are means of the unreduced diffused rows of each
  // member set; empty primitives are dropped and the rest renumbered.
  std::vector<std::vector<int>> members(static_cast<std::size_t>(cfg.k_primitive));
  for (Eigen::Index i = 0; i < n; ++i)
    members[static_cast<std::size_t>(prim.labels[static_cast<std::size_t>(i)])].push_back(
        static_cast<int>(i));

  std::vector<Eigen::RowVectorXd> centers;
  for (const auto& m : members) {
    if (m.empty()) continue;
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(diffused.cols());
    for (int i : m) mean += diffused.row(i);
    centers.push_back(mean / static_cast<double>(m.size()));
  }
  const int kp = static_cast<int>(centers.size());
  model.centers.resize(kp, diffused.cols());
  for (int p = 0; p < kp; ++p) model.centers.row(p) = centers[static_cast<std::size_t>(p)];

  // Final cosine argmax against all centers; this may move superpoints
  // across primitives.
  model.primitive_of_superpoint.assign(static_cast<std::size_t>(n), 0);
  Eigen::MatrixXd center_hat(kp, diffused.cols());
  for (int p = 0; p < kp; ++p)
    center_hat.row(p) = model.centers.row(p) / std::max(model.centers.row(p).norm(), kNormFloor);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double norm = diffused.row(i).norm();
    if (norm < kNormFloor) {  // undefined cosine: default to primitive 0
      ++model.zero_norm_rows;
      continue;
    }
    const Eigen::RowVectorXd row_hat = diffused.row(i) / norm;
    int best = 0;
    double best_sim = -std::numeric_limits<double>::infinity();
    for (int p = 0; p < kp; ++p) {
      const double sim = row_hat.dot(center_hat.row(p));
      if (sim > best_sim) { best_sim = sim; best = p; }
    }
    model.primitive_of_superpoint[static_cast<std::size_t>(i)] = best;
  }
  return model;
}

std::vector<int> pseudo_labels(const PrimitiveModel& model, const SuperpointPartition& partition) {
  if (static_cast<int>(model.primitive_of_superpoint.size()) != partition.count)
    throw Error("primitive model and partition disagree on superpoint count");
  std::vector<int> labels(partition.assignment.size());
  for (std::size_t i = 0; i < partition.assignment.size(); ++i)
    labels[i] = model.primitive_of_superpoint[static_cast<std::size_t>(partition.assignment[i])];
  return labels;
}

}  // namespace dds
