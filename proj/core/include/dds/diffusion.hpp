#ifndef DDS_DIFFUSION_HPP
#define DDS_DIFFUSION_HPP

#include <Eigen/Dense>

namespace dds {

/// Dense superpoint affinity graph. A_ij = exp(-|h_i - h_j|^2 / C) includes
/// the unit self-affinity, so degrees are strictly positive.
struct SuperpointGraph {
  Eigen::MatrixXd affinity;             // A, symmetric, entries in (0,1]
  Eigen::MatrixXd normalized_adjacency; // A~ = D^-1/2 A D^-1/2
  Eigen::MatrixXd laplacian;            // L = I - A~
  Eigen::VectorXd degrees;              // row sums of A

  Eigen::Index size() const { return affinity.rows(); }
};

struct DiffusionCfg {
  double alpha = 0.5;   // diffusion coefficient in (0,1)
  int max_iters = 200;
  double tol = 1e-10;   // inf-norm step threshold
};

struct DiffusionResult {
  Eigen::MatrixXd features;  // H
  int iters = 0;
  bool converged = true;     // false when max_iters hit with step >= tol
};

/// RBF-kernel graph over superpoint features with gamma = 1/C.
SuperpointGraph build_graph(const Eigen::MatrixXd& features);

/// Iterative propagation H^(t+1) = (1-alpha) F + alpha A~ H^(t) from H^(0)=F.
DiffusionResult diffuse_iterative(const SuperpointGraph& graph, const Eigen::MatrixXd& features,
                                  const DiffusionCfg& cfg = {});

/// Fixed point H* = (I + beta L)^-1 F with beta = alpha/(1-alpha), computed
/// by a direct dense solve. Throws SingularSystem if the solve fails.
Eigen::MatrixXd diffuse_closed_form(const SuperpointGraph& graph, const Eigen::MatrixXd& features,
                                    double alpha);

/// Low-pass graph Fourier baseline: full eigendecomposition of L, features
/// reconstructed from the keep_fraction lowest-frequency eigenvectors.
Eigen::MatrixXd gft_baseline(const SuperpointGraph& graph, const Eigen::MatrixXd& features,
                             double keep_fraction);

/// Plain PCA baseline: center the rows and return the top-`dims` scores.
Eigen::MatrixXd pca_baseline(const Eigen::MatrixXd& features, int dims);

}  // namespace dds

#endif
