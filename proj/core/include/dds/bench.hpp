#ifndef DDS_BENCH_HPP
#define DDS_BENCH_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace dds {

/// Best-of-three timing with enough inner repetitions that each sample is at
/// least `min_time` seconds, so sub-millisecond kernels still time stably.
double measure_seconds(const std::function<void()>& fn, double min_time = 0.05, int samples = 3);

struct BenchRow {
  int superpoints = 0;
  std::string method;
  double seconds = 0.0;
};

/// Scaling comparison over random feature matrices. Methods reported:
/// "diffusion" (graph build + `iters` iterative updates), "gft" (graph build
/// + low-pass eigendecomposition), "pca" (plain projection).
std::vector<BenchRow> bench_diffusion(const std::vector<int>& superpoint_counts, int channels,
                                      double alpha, int iters, std::uint64_t seed);

std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace dds

#endif
