// dds: annotation-free 3D scene labeling pipeline driver.
//
// Exit codes: 0 success, 2 configuration/usage error, 3 stage failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dds/bench.hpp"
#include "dds/bev.hpp"
#include "dds/config.hpp"
#include "dds/errors.hpp"
#include "dds/gradcheck.hpp"
#include "dds/io.hpp"
#include "dds/pipeline.hpp"
#include "dds/synthetic.hpp"
#include "dds/voting.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;

using json = nlohmann::json;

struct GenSceneOpts {
  std::string out_dir;
  std::string config_out;
  std::string preset = "canonical4";
  double sigma = 0.05;
  int cameras = 6;
  int channels = 16;
  double points_scale = 1.0;
  int erosion = 1;
  std::uint64_t seed = 0;
};

int cmd_gen_scene(const GenSceneOpts& opts) {
  dds::SyntheticSceneSpec spec;
  if (opts.preset == "canonical4") {
    spec = dds::canonical_scene_spec(opts.sigma, opts.cameras, opts.channels, opts.points_scale);
  } else if (opts.preset == "single") {
    spec = dds::canonical_scene_spec(opts.sigma, opts.cameras, opts.channels, opts.points_scale);
    spec.objects.resize(1);
    spec.class_names.resize(1);
  } else {
    std::cerr << "unknown preset: " << opts.preset << " (expected canonical4 or single)\n";
    return kExitConfig;
  }
  spec.mask_erosion = opts.erosion;

  const dds::SyntheticScene scene = dds::generate_scene(spec, opts.seed);
  dds::save_scene(opts.out_dir, scene);
  std::cout << "scene written to " << opts.out_dir << " (" << scene.cloud.size() << " points, "
            << scene.cameras.size() << " views)\n";
  if (!opts.config_out.empty()) {
    dds::write_text_file(opts.config_out, dds::default_config_text(opts.out_dir, "out"));
    std::cout << "config template written to " << opts.config_out << "\n";
  }
  return kExitOk;
}

int cmd_run(const std::string& config_path, const std::string& stage,
            const std::optional<std::string>& method, const std::optional<int>& threads) {
  dds::PipelineConfig cfg = dds::load_pipeline_config(config_path);
  if (method.has_value()) cfg.method = *method;
  if (threads.has_value()) cfg.threads = *threads;
  cfg.validate();

  const dds::PipelineResult result = dds::run_pipeline(cfg, stage);
  std::cout << "completed through stage '" << result.last_stage << "'\n";
  if (result.num_superpoints > 0) std::cout << "superpoints: " << result.num_superpoints << "\n";
  if (result.num_primitives > 0) std::cout << "primitives: " << result.num_primitives << "\n";
  if (result.has_metrics) {
    std::printf("matched  oAcc %.4f  mAcc %.4f  mIoU %.4f\n", result.matched.oacc,
                result.matched.macc, result.matched.miou);
    std::printf("named    oAcc %.4f  mAcc %.4f  mIoU %.4f  (unlabeled %.4f)\n", result.named.oacc,
                result.named.macc, result.named.miou, result.named.unlabeled_fraction);
  }
  return kExitOk;
}

int cmd_distill_check(int instances, std::uint64_t seed, double threshold) {
  const dds::GradCheckReport report = dds::run_distill_check(instances, seed);
  std::printf("loss_point  max relative gradient error: %.3e\n", report.point);
  std::printf("loss_proto  max relative gradient error: %.3e\n", report.proto);
  std::printf("loss_nce    max relative gradient error: %.3e\n", report.nce);
  std::printf("loss_total  max relative gradient error: %.3e\n", report.total);
  if (report.worst() < threshold) {
    std::printf("PASS (all below %.1e over %d instances)\n", threshold, instances);
    return kExitOk;
  }
  std::printf("FAIL (threshold %.1e)\n", threshold);
  return kExitStage;
}

int cmd_bench_diffusion(const std::vector<int>& ns, int channels, double alpha, int iters,
                        std::uint64_t seed) {
  const auto rows = dds::bench_diffusion(ns, channels, alpha, iters, seed);
  std::cout << dds::bench_csv(rows);
  return kExitOk;
}

std::vector<int> load_int_labels(const std::string& path) {
  if (path.size() > 5 && path.substr(path.size() - 5) == ".ddsp")
    return dds::load_point_cloud(path).gt_class;
  try {
    return json::parse(dds::read_text_file(path)).get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw dds::IoError("expected a JSON array of ints in " + path + ": " + e.what());
  }
}

int cmd_eval(const std::string& pred_path, const std::string& gt_path, const std::string& mode,
             const std::string& class_names_path, const std::string& json_out) {
  const std::vector<int> gt = load_int_labels(gt_path);
  if (gt.empty()) throw dds::IoError("ground truth is empty: " + gt_path);

  dds::MetricReport report;
  std::vector<std::string> class_names;
  if (!class_names_path.empty()) {
    try {
      class_names =
          json::parse(dds::read_text_file(class_names_path)).get<std::vector<std::string>>();
    } catch (const json::exception& e) {
      throw dds::IoError("expected a JSON array of strings in " + class_names_path + ": " +
                         e.what());
    }
  }

  if (mode == "matched") {
    report = dds::evaluate_matched(load_int_labels(pred_path), gt);
  } else if (mode == "named") {
    std::vector<std::optional<std::string>> names;
    try {
      for (const auto& entry : json::parse(dds::read_text_file(pred_path))) {
        if (entry.is_null()) names.emplace_back(std::nullopt);
        else names.emplace_back(entry.get<std::string>());
      }
    } catch (const json::exception& e) {
      throw dds::IoError("expected a JSON array of strings/nulls in " + pred_path + ": " +
                         e.what());
    }
    report = dds::evaluate_named(names, gt, class_names);
  } else {
    std::cerr << "mode must be matched or named\n";
    return kExitConfig;
  }

  std::cout << dds::metric_report_table(report, class_names);
  if (!json_out.empty()) dds::write_text_file(json_out, dds::metric_report_to_json(report));
  return kExitOk;
}

int cmd_export_bev(const std::string& cloud_path, const std::string& labels_path,
                   const std::string& out_path, int size) {
  const dds::PointCloud cloud = dds::load_point_cloud(cloud_path);
  std::vector<int> labels;
  if (labels_path.empty()) {
    if (!cloud.has_gt())
      throw dds::IoError("no --labels given and the cloud carries no ground truth");
    labels = cloud.gt_class;
  } else {
    labels = load_int_labels(labels_path);
  }
  dds::BevConfig cfg;
  cfg.image_size = size;
  dds::export_bev(out_path, cloud, labels, cfg);
  std::cout << "bev written to " << out_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"annotation-free 3D scene labeling pipeline"};
  app.require_subcommand(1);

  GenSceneOpts gen;
  auto* gen_cmd = app.add_subcommand("gen-scene", "generate a synthetic scene directory");
  gen_cmd->add_option("--out", gen.out_dir, "output scene directory")->required();
  gen_cmd->add_option("--preset", gen.preset, "canonical4 | single");
  gen_cmd->add_option("--sigma", gen.sigma, "feature noise sigma");
  gen_cmd->add_option("--cameras", gen.cameras, "camera ring size");
  gen_cmd->add_option("--channels", gen.channels, "feature channels");
  gen_cmd->add_option("--points-scale", gen.points_scale, "point budget multiplier");
  gen_cmd->add_option("--erosion", gen.erosion, "mask boundary erosion in pixels");
  gen_cmd->add_option("--seed", gen.seed, "rng seed");
  gen_cmd->add_option("--config-out", gen.config_out, "also write a matching config template");

  std::string run_config, run_stage;
  std::optional<std::string> run_method;
  std::optional<int> run_threads;
  auto* run_cmd = app.add_subcommand("run", "run the pipeline from a config file");
  run_cmd->add_option("--config", run_config, "TOML-style config path")->required();
  run_cmd->add_option("--stage", run_stage, "stop after this stage (prefix run)");
  run_cmd->add_option("--method", run_method, "override pipeline.method: diffusion | pca | gft");
  run_cmd->add_option("--threads", run_threads, "override pipeline.threads");

  int check_instances = 50;
  std::uint64_t check_seed = 0;
  double check_threshold = 1e-4;
  auto* check_cmd =
      app.add_subcommand("distill-check", "finite-difference check of the loss gradients");
  check_cmd->add_option("--instances", check_instances, "random instances");
  check_cmd->add_option("--seed", check_seed, "rng seed");
  check_cmd->add_option("--threshold", check_threshold, "pass/fail threshold");

  std::vector<int> bench_ns = {250, 500, 1000, 2000};
  int bench_channels = 16, bench_iters = 10;
  double bench_alpha = 0.5;
  std::uint64_t bench_seed = 0;
  auto* bench_cmd = app.add_subcommand("bench-diffusion", "emit CSV scaling measurements");
  bench_cmd->add_option("--ns", bench_ns, "superpoint counts")->delimiter(',');
  bench_cmd->add_option("--channels", bench_channels, "feature channels");
  bench_cmd->add_option("--alpha", bench_alpha, "diffusion coefficient");
  bench_cmd->add_option("--iters", bench_iters, "diffusion iterations per measurement");
  bench_cmd->add_option("--seed", bench_seed, "rng seed");

  std::string eval_pred, eval_gt, eval_mode = "matched", eval_classes, eval_json;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate predictions against ground truth");
  eval_cmd->add_option("--pred", eval_pred, "labels JSON (ints, or strings/null for named)")
      ->required();
  eval_cmd->add_option("--gt", eval_gt, "labels JSON or a .ddsp cloud with ground truth")
      ->required();
  eval_cmd->add_option("--mode", eval_mode, "matched | named");
  eval_cmd->add_option("--class-names", eval_classes, "JSON array of class names");
  eval_cmd->add_option("--json-out", eval_json, "also write the report as JSON");

  std::string bev_cloud, bev_labels, bev_out = "bev.png";
  int bev_size = 512;
  auto* bev_cmd = app.add_subcommand("export-bev", "render a top-down label map");
  bev_cmd->add_option("--cloud", bev_cloud, "point cloud (.ddsp)")->required();
  bev_cmd->add_option("--labels", bev_labels, "labels JSON (defaults to the cloud's gt)");
  bev_cmd->add_option("--out", bev_out, "output PNG path");
  bev_cmd->add_option("--size", bev_size, "image size in pixels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (gen_cmd->parsed()) return cmd_gen_scene(gen);
    if (run_cmd->parsed()) return cmd_run(run_config, run_stage, run_method, run_threads);
    if (check_cmd->parsed()) return cmd_distill_check(check_instances, check_seed, check_threshold);
    if (bench_cmd->parsed())
      return cmd_bench_diffusion(bench_ns, bench_channels, bench_alpha, bench_iters, bench_seed);
    if (eval_cmd->parsed()) return cmd_eval(eval_pred, eval_gt, eval_mode, eval_classes, eval_json);
    if (bev_cmd->parsed()) return cmd_export_bev(bev_cloud, bev_labels, bev_out, bev_size);
  } catch (const dds::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const dds::StageError& e) {
    std::cerr << "stage error: " << e.what() << "\n";
    return kExitStage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStage;
  }
  return kExitConfig;
}
