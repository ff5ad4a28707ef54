#ifndef DDS_PIPELINE_HPP
#define DDS_PIPELINE_HPP

#include <string>
#include <vector>

#include "dds/config.hpp"
#include "dds/voting.hpp"

namespace dds {

struct PipelineResult {
  std::string last_stage;
  int num_superpoints = 0;
  int num_primitives = 0;
  bool has_metrics = false;  // false when the scene carries no ground truth
  MetricReport matched;
  MetricReport named;
};

/// Stage names in execution order:
/// teacher, distill, superpoint, diffusion, primitives, vote, metrics.
const std::vector<std::string>& pipeline_stage_names();

/// Runs stages in order up to and including `stop_stage` (empty = all).
/// A stage whose artifacts already exist in out_dir is loaded instead of
/// recomputed, so a resumed run is byte-identical to a cold one. Failures
/// surface as StageError carrying the stage name and an input digest.
PipelineResult run_pipeline(const PipelineConfig& cfg, const std::string& stop_stage = "");

}  // namespace dds

#endif
