#include "dds/diffusion.hpp"

#include <algorithm>
#include <cmath>

#include "dds/errors.hpp"

namespace dds {

SuperpointGraph build_graph(const Eigen::MatrixXd& features) {
  const Eigen::Index n = features.rows();
  if (n < 1) throw Error("graph needs at least one superpoint");
  const double gamma = 1.0 / static_cast<double>(features.cols());

  // Pairwise squared distances through the Gram matrix so the quadratic
  // work is one GEMM plus fused streaming passes.
  const Eigen::VectorXd sq = features.rowwise().squaredNorm();
  const Eigen::MatrixXd gram = features * features.transpose();

  SuperpointGraph g;
  g.affinity = (-gamma * (sq.replicate(1, n) + sq.transpose().replicate(n, 1) - 2.0 * gram)
                             .cwiseMax(0.0)  // clamp Gram-form cancellation noise
                             .array())
                   .exp();

  // GEMM results are not bitwise symmetric; mirror the lower triangle in
  // cache-sized tiles to make A exactly so.
  constexpr Eigen::Index kTile = 64;
  for (Eigen::Index jb = 0; jb < n; jb += kTile) {
    const Eigen::Index cols = std::min(kTile, n - jb);
    for (Eigen::Index i = jb + 1; i < jb + cols; ++i)
      for (Eigen::Index j = jb; j < i; ++j) g.affinity(j, i) = g.affinity(i, j);
    for (Eigen::Index ib = jb + kTile; ib < n; ib += kTile) {
      const Eigen::Index rows = std::min(kTile, n - ib);
      g.affinity.block(jb, ib, cols, rows) =
          g.affinity.block(ib, jb, rows, cols).transpose();
    }
  }
  g.affinity.diagonal().setOnes();
  // Row sums of a symmetric matrix as column sums: sequential memory order.
  g.degrees = g.affinity.colwise().sum();
  const Eigen::VectorXd dinv_sqrt = g.degrees.array().rsqrt();
  // One fused streaming pass; (dinv_i * dinv_j) * A_ij keeps the result
  // bitwise symmetric, which the selfadjoint fast paths downstream rely on.
  g.normalized_adjacency = (dinv_sqrt.replicate(1, n).array() *
                            dinv_sqrt.transpose().replicate(n, 1).array()) *
                           g.affinity.array();
  g.laplacian = Eigen::MatrixXd::Identity(n, n) - g.normalized_adjacency;
  return g;
}

DiffusionResult diffuse_iterative(const SuperpointGraph& graph, const Eigen::MatrixXd& features,
                                  const DiffusionCfg& cfg) {
  if (cfg.alpha <= 0.0 || cfg.alpha >= 1.0) throw Error("alpha must lie in (0,1)");
  if (cfg.max_iters < 1 || cfg.tol <= 0.0) throw Error("invalid diffusion configuration");
  if (graph.size() != features.rows()) throw Error("graph and feature matrix disagree on size");

  DiffusionResult out;
  out.features = features;
  Eigen::MatrixXd next;
  // The symmetric product reads only the lower triangle of A~, halving the
  // dominant memory traffic of each iteration.
  const auto adjacency = graph.normalized_adjacency.selfadjointView<Eigen::Lower>();
  for (out.iters = 0; out.iters < cfg.max_iters; ++out.iters) {
    next.noalias() = adjacency * out.features;
    next = (1.0 - cfg.alpha) * features + cfg.alpha * next;
    const double step = (next - out.features).cwiseAbs().maxCoeff();
    out.features.swap(next);
    if (step < cfg.tol) {
      ++out.iters;
      return out;
    }
  }
  out.converged = false;
  return out;
}

Eigen::MatrixXd diffuse_closed_form(const SuperpointGraph& graph, const Eigen::MatrixXd& features,
                                    double alpha) {
  if (alpha <= 0.0 || alpha >= 1.0) throw Error("alpha must lie in (0,1)");
  if (graph.size() != features.rows()) throw Error("graph and feature matrix disagree on size");

  const double beta = alpha / (1.0 - alpha);
  const Eigen::Index n = graph.size();
  const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n) + beta * graph.laplacian;

  // The system is symmetric positive definite (spectrum of L lies in [0,2]),
  // so an LDLT solve applies; the inverse is never formed explicitly.
  Eigen::LDLT<Eigen::MatrixXd> solver(system);
  if (solver.info() != Eigen::Success)
    throw SingularSystem("diffusion fixed-point solve failed");
  return solver.solve(features);
}

Eigen::MatrixXd gft_baseline(const SuperpointGraph& graph, const Eigen::MatrixXd& features,
                             double keep_fraction) {
  if (keep_fraction <= 0.0 || keep_fraction > 1.0)
    throw Error("keep_fraction must lie in (0,1]");
  if (graph.size() != features.rows()) throw Error("graph and feature matrix disagree on size");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(graph.laplacian);
  if (eig.info() != Eigen::Success) throw EigFailure("Laplacian eigendecomposition failed");

  // Eigenvalues come back ascending, so the first k columns are the
  // lowest-frequency basis.
  const Eigen::Index n = graph.size();
  const Eigen::Index k = std::clamp<Eigen::Index>(
      static_cast<Eigen::Index>(std::ceil(keep_fraction * static_cast<double>(n))),
      Eigen::Index{1}, n);
  const auto basis = eig.eigenvectors().leftCols(k);
  return basis * (basis.transpose() * features);
}

Eigen::MatrixXd pca_baseline(const Eigen::MatrixXd& features, int dims) {
  const Eigen::Index n = features.rows();
  const Eigen::Index c = features.cols();
  if (dims < 1 || dims > std::min(n, c)) throw Error("dims must lie in [1, min(rows, cols)]");

  const Eigen::RowVectorXd mean = features.colwise().mean();
  const Eigen::MatrixXd centered = features.rowwise() - mean;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return centered * svd.matrixV().leftCols(dims);
}

}  // namespace dds
