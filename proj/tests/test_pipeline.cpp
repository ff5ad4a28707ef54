#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "dds/errors.hpp"
#include "dds/io.hpp"
#include "dds/pipeline.hpp"
#include "dds/synthetic.hpp"

using namespace dds;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("dds_pipe_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string sub(const std::string& name) const { return (path / name).string(); }
};

std::map<std::string, std::string> dir_bytes(const std::string& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out[fs::relative(entry.path(), dir).string()] = ss.str();
  }
  return out;
}

PipelineConfig config_for(const TempDir& dir, const std::string& scene, const std::string& out) {
  PipelineConfig cfg;
  cfg.scene_dir = dir.sub(scene);
  cfg.out_dir = dir.sub(out);
  return cfg;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("canonical scene is recovered nearly perfectly") {
  TempDir dir;
  save_scene(dir.sub("scene"), generate_scene(canonical_scene_spec(0.05, 6, 16, 0.5), 0));
  const PipelineConfig cfg = config_for(dir, "scene", "out");
  const PipelineResult result = run_pipeline(cfg);

  REQUIRE(result.has_metrics);
  CHECK(result.matched.miou >= 0.95);
  CHECK(result.named.oacc >= 0.9);
  CHECK(result.num_primitives == 4);
  CHECK(fs::exists(dir.sub("out") + "/bev.png"));
  CHECK(fs::exists(dir.sub("out") + "/metrics.txt"));
}

TEST_CASE("teacher stage output matches the archetype oracle") {
  TempDir dir;
  SyntheticSceneSpec spec = canonical_scene_spec(0.0, 4, 8, 0.2);
  save_scene(dir.sub("scene"), generate_scene(spec, 3));
  PipelineConfig cfg = config_for(dir, "scene", "out");
  const PipelineResult result = run_pipeline(cfg, "teacher");
  CHECK(result.last_stage == "teacher");

  const TeacherField teacher = load_teacher(dir.sub("out") + "/teacher.ddst");
  const SyntheticScene scene = load_scene(dir.sub("scene"));
  REQUIRE(teacher.size() == scene.cloud.size());

  // With zero noise every visible point's teacher row must sit on its class
  // archetype (one-hot rows by construction).
  int checked = 0;
  for (Eigen::Index i = 0; i < teacher.size(); ++i) {
    if (!teacher.visible[static_cast<std::size_t>(i)]) continue;
    const int cls = scene.cloud.gt_class[static_cast<std::size_t>(i)];
    Eigen::RowVectorXd archetype = Eigen::RowVectorXd::Zero(8);
    archetype[cls] = 1.0;
    if ((teacher.features.row(i) - archetype).cwiseAbs().maxCoeff() < 1e-6) ++checked;
  }
  // Occlusion-free pixels dominate; only silhouette-adjacent points may
  // sample a neighboring object's paint.
  CHECK(checked > 0.9 * static_cast<double>(teacher.size()));
}

TEST_CASE("two identical runs produce byte-identical artifacts") {
  TempDir dir;
  save_scene(dir.sub("scene"), generate_scene(canonical_scene_spec(0.1, 4, 8, 0.25), 5));
  PipelineConfig cfg_a = config_for(dir, "scene", "out_a");
  PipelineConfig cfg_b = config_for(dir, "scene", "out_b");
  run_pipeline(cfg_a);
  run_pipeline(cfg_b);
  CHECK(dir_bytes(dir.sub("out_a")) == dir_bytes(dir.sub("out_b")));
}

TEST_CASE("resuming from cached stages reproduces a cold run bit-for-bit") {
  TempDir dir;
  save_scene(dir.sub("scene"), generate_scene(canonical_scene_spec(0.1, 4, 8, 0.25), 8));

  PipelineConfig warm = config_for(dir, "scene", "warm");
  run_pipeline(warm, "superpoint");  // prefix only
  run_pipeline(warm);                // resumes from the cached prefix

  PipelineConfig cold = config_for(dir, "scene", "cold");
  run_pipeline(cold);

  CHECK(dir_bytes(dir.sub("warm")) == dir_bytes(dir.sub("cold")));
}

TEST_CASE("thread count does not change the artifacts") {
  TempDir dir;
  save_scene(dir.sub("scene"), generate_scene(canonical_scene_spec(0.1, 3, 8, 0.2), 11));
  PipelineConfig one = config_for(dir, "scene", "one");
  one.threads = 1;
  PipelineConfig four = config_for(dir, "scene", "four");
  four.threads = 4;
  run_pipeline(one);
  run_pipeline(four);
  CHECK(dir_bytes(dir.sub("one")) == dir_bytes(dir.sub("four")));
}

TEST_CASE("the three methods yield three structurally complete reports") {
  TempDir dir;
  save_scene(dir.sub("scene"), generate_scene(canonical_scene_spec(0.15, 6, 16, 0.3), 21));
  std::map<std::string, double> miou;
  for (const std::string method : {"diffusion", "pca", "gft"}) {
    PipelineConfig cfg = config_for(dir, "scene", "out_" + method);
    cfg.method = method;
    const PipelineResult result = run_pipeline(cfg);
    REQUIRE(result.has_metrics);
    CHECK(result.matched.miou > 0.0);
    miou[method] = result.matched.miou;
  }
  // Structural echo of the ablation axis: diffusion at least matches the
  // plain PCA baseline on a noisy scene.
  CHECK(miou["diffusion"] >= miou["pca"]);
}

TEST_CASE("a one-point scene runs to completion") {
  TempDir dir;
  SyntheticSceneSpec spec;
  spec.class_names = {"solo"};
  spec.feature_channels = 4;
  spec.objects = {{ObjectSpec::Shape::Box, {0, 0, 1.0}, {0.1, 0.1, 0.1}, 0, 1}};
  save_scene(dir.sub("scene"), generate_scene(spec, 2));

  PipelineConfig cfg = config_for(dir, "scene", "out");
  cfg.mask_merge.min_mask_points = 1;
  const PipelineResult result = run_pipeline(cfg);
  CHECK(result.num_superpoints == 1);
  CHECK(result.num_primitives == 1);
  CHECK(result.last_stage == "metrics");
}

TEST_CASE("stage failures carry the stage name and digest") {
  TempDir dir;
  PipelineConfig cfg;
  cfg.scene_dir = dir.sub("missing_scene");
  cfg.out_dir = dir.sub("out");
  try {
    run_pipeline(cfg);
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage_name == "load-scene");
    CHECK(!e.input_digest.empty());
  }
}

TEST_CASE("unknown stage names are rejected") {
  TempDir dir;
  PipelineConfig cfg;
  cfg.scene_dir = dir.sub("scene");
  CHECK_THROWS_AS(run_pipeline(cfg, "nosuchstage"), ConfigError);
}

}  // TEST_SUITE
