#ifndef DDS_CONFIG_HPP
#define DDS_CONFIG_HPP

#include <cstdint>
#include <string>

#include "dds/cluster.hpp"
#include "dds/distill.hpp"
#include "dds/diffusion.hpp"
#include "dds/superpoint.hpp"
#include "dds/teacher.hpp"

namespace dds {

/// Every paper-unspecified constant is surfaced here with its documented
/// default. Parsed from a TOML-style document of [section] blocks holding
/// key = value lines (strings quoted, # comments allowed).
struct PipelineConfig {
  std::string scene_dir;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  std::string method = "diffusion";  // diffusion | pca | gft
  int threads = 1;
  double eta = 0.5;              // voting confidence threshold
  int bev_size = 512;
  double gft_keep_fraction = 0.25;
  double teacher_eps = 1e-8;     // multi-view average denominator guard
  double vote_eps = 1e-8;        // vote ratio denominator guard

  MaskMergeConfig mask_merge;
  DistillWeights distill;
  SegCfg superpoint;
  DiffusionCfg diffusion;
  ClusterCfg cluster{.k_primitive = 0};  // 0 = one primitive per scene class

  /// Throws ConfigError on out-of-range values or an unknown method.
  void validate() const;
};

PipelineConfig parse_pipeline_config(const std::string& text);
PipelineConfig load_pipeline_config(const std::string& path);

/// A fully commented config document reflecting the defaults; `scene` and
/// `out` are substituted into the paths section.
std::string default_config_text(const std::string& scene_dir = "scene",
                                const std::string& out_dir = "out");

}  // namespace dds

#endif
