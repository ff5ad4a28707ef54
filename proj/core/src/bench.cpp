#include "dds/bench.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <random>
#include <sstream>

#include "dds/diffusion.hpp"

namespace dds {

namespace {

using Clock = std::chrono::steady_clock;

Eigen::MatrixXd random_features(int n, int c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd f(n, c);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < c; ++j) f(i, j) = normal(rng);
  return f;
}

}  // namespace

double measure_seconds(const std::function<void()>& fn, double min_time, int samples) {
  fn();  // warm up
  double best = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    long reps = 1;
    for (;;) {
      const auto t0 = Clock::now();
      for (long r = 0; r < reps; ++r) fn();
      const double total = std::chrono::duration<double>(Clock::now() - t0).count();
      if (total >= min_time || reps >= (1L << 20)) {
        best = std::min(best, total / static_cast<double>(reps));
        break;
      }
      const double target = min_time / std::max(total, 1e-9);
      reps = std::max(reps + 1, static_cast<long>(static_cast<double>(reps) * target * 1.2));
    }
  }
  return best;
}

std::vector<BenchRow> bench_diffusion(const std::vector<int>& superpoint_counts, int channels,
                                      double alpha, int iters, std::uint64_t seed) {
  std::vector<BenchRow> rows;
  for (int n : superpoint_counts) {
    const Eigen::MatrixXd f = random_features(n, channels, seed + static_cast<std::uint64_t>(n));

    DiffusionCfg cfg;
    cfg.alpha = alpha;
    cfg.max_iters = iters;
    cfg.tol = 1e-300;  // time a fixed iteration count
    rows.push_back({n, "diffusion", measure_seconds([&] {
                      const SuperpointGraph g = build_graph(f);
                      diffuse_iterative(g, f, cfg);
                    })});
    rows.push_back({n, "gft", measure_seconds([&] {
                      const SuperpointGraph g = build_graph(f);
                      gft_baseline(g, f, 0.25);
                    })});
    rows.push_back({n, "pca", measure_seconds([&] {
                      pca_baseline(f, std::min<int>(channels, n));
                    })});
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os << "ns,method,seconds\n";
  for (const auto& row : rows)
    os << row.superpoints << "," << row.method << "," << row.seconds << "\n";
  return os.str();
}

}  // namespace dds
