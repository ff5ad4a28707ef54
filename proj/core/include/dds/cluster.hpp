#ifndef DDS_CLUSTER_HPP
#define DDS_CLUSTER_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "dds/superpoint.hpp"

namespace dds {

struct ClusterCfg {
  double energy_ratio = 0.9; // cumulative variance kept by channel selection
  int k_coarse = 32;         // first KMeans (clamped to the row count)
  int embed_dims = 16;       // PCA embedding dimension d_e
  int k_primitive = 16;      // second KMeans; one primitive per target class
  std::uint64_t seed = 0;
  int restarts = 5;
};

struct KMeansResult {
  std::vector<int> labels;
  Eigen::MatrixXd centers;  // k x D; rows of empty clusters duplicate their donor
  double wcss = 0.0;
};

/// Primitive pseudo-label model. Centers live in the original diffused
/// feature space regardless of where the clustering ran.
struct PrimitiveModel {
  Eigen::MatrixXd centers;                 // K_p x C
  std::vector<int> primitive_of_superpoint;
  std::vector<bool> channel_mask;          // channels kept by variance selection
  std::vector<int> coarse_labels;          // diagnostic only; never feeds primitives
  int zero_norm_rows = 0;                  // rows defaulted to primitive 0
};

/// Keeps the minimal prefix of channels (sorted by descending variance) whose
/// variance sum reaches energy_ratio of the total. Returns the reduced matrix
/// and the boolean mask over original channels.
std::pair<Eigen::MatrixXd, std::vector<bool>> select_channels(const Eigen::MatrixXd& features,
                                                              double energy_ratio);

/// Lloyd iterations from k-means++ seeding; best of `restarts` runs by
/// within-cluster sum of squares, ties to the lowest restart index. Restarts
/// run on `threads` workers; the winner does not depend on the thread count.
KMeansResult kmeans(const Eigen::MatrixXd& rows, int k, std::uint64_t seed, int restarts = 1,
                    int threads = 1);

/// Channel selection, coarse KMeans, PCA embedding, second KMeans, then
/// primitive centers over the unreduced diffused rows and a final cosine
/// argmax reassignment of every superpoint.
PrimitiveModel fit_primitives(const Eigen::MatrixXd& diffused, const ClusterCfg& cfg,
                              int threads = 1);

/// Maps superpoint primitive labels back to points.
std::vector<int> pseudo_labels(const PrimitiveModel& model, const SuperpointPartition& partition);

}  // namespace dds

#endif
