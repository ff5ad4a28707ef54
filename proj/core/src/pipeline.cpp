#include "dds/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <utility>

#include <json.hpp>

#include "dds/bev.hpp"
#include "dds/cluster.hpp"
#include "dds/diffusion.hpp"
#include "dds/distill.hpp"
#include "dds/errors.hpp"
#include "dds/io.hpp"
#include "dds/superpoint.hpp"
#include "dds/synthetic.hpp"
#include "dds/teacher.hpp"

namespace dds {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

const std::vector<std::string> kStages = {"teacher",   "distill",    "superpoint", "diffusion",
                                          "primitives", "vote",      "metrics"};

std::string digest_file(const std::string& path) {
  if (!fs::exists(path)) return "missing";
  const std::string bytes = read_text_file(path);
  return fnv1a_hex(bytes.data(), bytes.size());
}

bool all_exist(const std::vector<std::string>& paths) {
  return std::all_of(paths.begin(), paths.end(),
                     [](const std::string& p) { return fs::exists(p); });
}

struct StageContext {
  const PipelineConfig& cfg;
  SyntheticScene scene{};
  fs::path out{};

  TeacherField teacher{};
  MaskGroups groups{};
  SuperpointPartition partition{};
  Eigen::MatrixXd pooled{};
  Eigen::MatrixXd diffused{};
  PrimitiveModel primitives{};
  std::vector<int> point_primitive{};
  ClusterLabeling labeling{};
};

void save_mask_groups(const std::string& path, const MaskGroups& groups) {
  json j;
  json list = json::array();
  for (const auto& g : groups.groups) list.push_back({{"label", g.label}, {"points", g.points}});
  j["groups"] = list;
  j["point_mask"] = groups.point_mask;
  write_text_file(path, j.dump() + "\n");
}

MaskGroups load_mask_groups(const std::string& path) {
  MaskGroups groups;
  try {
    const json j = json::parse(read_text_file(path));
    for (const auto& entry : j.at("groups"))
      groups.groups.push_back(
          {entry.at("label").get<std::string>(), entry.at("points").get<std::vector<int>>()});
    groups.point_mask = j.at("point_mask").get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw IoError("malformed mask group cache " + path + ": " + e.what());
  }
  return groups;
}

void stage_teacher(StageContext& ctx) {
  const std::string teacher_path = (ctx.out / "teacher.ddst").string();
  const std::string groups_path = (ctx.out / "mask_groups.json").string();
  if (all_exist({teacher_path, groups_path})) {
    ctx.teacher = load_teacher(teacher_path);
    ctx.groups = load_mask_groups(groups_path);
    return;
  }
  std::vector<std::pair<CameraModel, ViewFeatureMap>> feature_views;
  std::vector<std::pair<CameraModel, ViewMaskSet>> mask_views;
  for (std::size_t v = 0; v < ctx.scene.cameras.size(); ++v) {
    feature_views.emplace_back(ctx.scene.cameras[v], ctx.scene.features[v]);
    mask_views.emplace_back(ctx.scene.cameras[v], ctx.scene.masks[v]);
  }
  ctx.teacher =
      build_teacher(ctx.scene.cloud, feature_views, ctx.cfg.threads, ctx.cfg.teacher_eps);
  ctx.groups = lift_masks(ctx.scene.cloud, mask_views, ctx.cfg.mask_merge, ctx.cfg.threads);
  save_teacher(teacher_path, ctx.teacher);
  save_mask_groups(groups_path, ctx.groups);
}

void stage_distill(StageContext& ctx) {
  const std::string report_path = (ctx.out / "distill_report.json").string();
  if (fs::exists(report_path)) return;  // report feeds nothing downstream

  // The pipeline carries no trainable student; the report evaluates the
  // objective at the teacher optimum as a self-check of the loss surface.
  StudentField student{ctx.teacher.features};
  json j;
  j["weights"] = {{"lambda_point", ctx.cfg.distill.lambda_point},
                  {"lambda_proto", ctx.cfg.distill.lambda_proto},
                  {"lambda_nce", ctx.cfg.distill.lambda_nce},
                  {"tau", ctx.cfg.distill.tau}};
  j["loss_point"] = loss_point(student, ctx.teacher).value;
  try {
    const PrototypePair protos = compute_prototypes(student, ctx.teacher, ctx.groups,
                                                    ctx.cfg.mask_merge.min_mask_points);
    j["loss_proto"] = loss_proto(protos).value;
    j["loss_nce"] = loss_nce(protos, ctx.cfg.distill.tau).value;
    j["loss_total"] = loss_total(student, ctx.teacher, ctx.groups, ctx.cfg.distill,
                                 ctx.cfg.mask_merge.min_mask_points)
                          .value;
    j["num_prototypes"] = protos.count();
  } catch (const EmptyPrototypeSet&) {
    j["prototype_terms"] = "skipped: no mask survived the size filter";
  }
  write_text_file(report_path, j.dump(2) + "\n");
}

void stage_superpoint(StageContext& ctx) {
  const std::string partition_path = (ctx.out / "superpoints.ddss").string();
  const std::string pooled_path = (ctx.out / "pooled.ddsh").string();
  if (all_exist({partition_path, pooled_path})) {
    ctx.partition = load_partition(partition_path);
    ctx.pooled = load_matrix(pooled_path);
    return;
  }
  ctx.partition = oversegment(ctx.scene.cloud, ctx.cfg.superpoint);
  ctx.pooled = pool_features(ctx.partition, ctx.teacher.features);
  save_partition(partition_path, ctx.partition);
  save_matrix(pooled_path, ctx.pooled);
}

void stage_diffusion(StageContext& ctx) {
  const std::string diffused_path = (ctx.out / "diffused.ddsh").string();
  const std::string info_path = (ctx.out / "diffusion_info.json").string();
  if (all_exist({diffused_path, info_path})) {
    ctx.diffused = load_matrix(diffused_path);
    return;
  }
  json info;
  info["method"] = ctx.cfg.method;
  if (ctx.cfg.method == "pca") {
    // Baseline without relational propagation: full-rank centered rotation.
    const int dims = static_cast<int>(std::min(ctx.pooled.rows(), ctx.pooled.cols()));
    ctx.diffused = pca_baseline(ctx.pooled, dims);
    info["dims"] = dims;
  } else {
    const SuperpointGraph graph = build_graph(ctx.pooled);
    if (ctx.cfg.method == "gft") {
      ctx.diffused = gft_baseline(graph, ctx.pooled, ctx.cfg.gft_keep_fraction);
      info["keep_fraction"] = ctx.cfg.gft_keep_fraction;
    } else {
      ctx.diffused = diffuse_closed_form(graph, ctx.pooled, ctx.cfg.diffusion.alpha);
      info["alpha"] = ctx.cfg.diffusion.alpha;
    }
  }
  save_matrix(diffused_path, ctx.diffused);
  write_text_file(info_path, info.dump(2) + "\n");
}

void stage_primitives(StageContext& ctx) {
  const std::string model_path = (ctx.out / "primitives.json").string();
  const std::string labels_path = (ctx.out / "pseudo_labels.json").string();
  if (all_exist({model_path, labels_path})) {
    ctx.primitives = load_primitive_model(model_path);
    try {
      ctx.point_primitive =
          json::parse(read_text_file(labels_path)).get<std::vector<int>>();
    } catch (const json::exception& e) {
      throw IoError("malformed pseudo label cache: " + std::string(e.what()));
    }
    return;
  }
  ClusterCfg ccfg = ctx.cfg.cluster;
  if (ccfg.k_primitive <= 0)
    ccfg.k_primitive = static_cast<int>(ctx.scene.class_names.size());
  // Degenerate scenes may expose fewer superpoints than classes.
  ccfg.k_primitive = std::min(ccfg.k_primitive, ctx.partition.count);
  ctx.primitives = fit_primitives(ctx.diffused, ccfg, ctx.cfg.threads);
  ctx.point_primitive = pseudo_labels(ctx.primitives, ctx.partition);
  save_primitive_model(model_path, ctx.primitives);
  write_text_file(labels_path, json(ctx.point_primitive).dump() + "\n");
}

void stage_vote(StageContext& ctx) {
  const std::string votes_path = (ctx.out / "votes.json").string();
  const std::string names_path = (ctx.out / "cluster_names.json").string();

  ctx.labeling.cluster_of_point = ctx.point_primitive;
  ctx.labeling.num_clusters = static_cast<int>(ctx.primitives.centers.rows());

  if (all_exist({votes_path, names_path})) {
    std::vector<std::optional<std::string>> names;
    try {
      for (const auto& entry : json::parse(read_text_file(names_path))) {
        if (entry.is_null()) names.emplace_back(std::nullopt);
        else names.emplace_back(entry.get<std::string>());
      }
    } catch (const json::exception& e) {
      throw IoError("malformed cluster name cache: " + std::string(e.what()));
    }
    ctx.labeling = propagate(ctx.labeling, names);
    return;
  }

  std::vector<std::pair<CameraModel, ViewMaskSet>> mask_views;
  for (std::size_t v = 0; v < ctx.scene.cameras.size(); ++v)
    mask_views.emplace_back(ctx.scene.cameras[v], ctx.scene.masks[v]);
  const auto point_labels =
      collect_point_labels(ctx.scene.cloud, mask_views, ctx.cfg.mask_merge, ctx.cfg.threads);

  const VoteTable votes = collect_votes(ctx.labeling, point_labels, ctx.cfg.eta, ctx.cfg.vote_eps);
  const auto names = assign_semantics(votes);
  ctx.labeling = propagate(ctx.labeling, names);

  json jv;
  jv["labels"] = votes.labels;
  json counts = json::array();
  for (Eigen::Index k = 0; k < votes.counts.rows(); ++k) {
    json row = json::array();
    for (Eigen::Index q = 0; q < votes.counts.cols(); ++q) row.push_back(votes.counts(k, q));
    counts.push_back(std::move(row));
  }
  jv["counts"] = counts;
  jv["eta"] = votes.eta;
  write_text_file(votes_path, jv.dump(2) + "\n");

  json jn = json::array();
  for (const auto& name : names) {
    if (name.has_value()) jn.push_back(*name);
    else jn.push_back(nullptr);
  }
  write_text_file(names_path, jn.dump() + "\n");
}

void stage_metrics(StageContext& ctx, PipelineResult& result) {
  const std::string matched_path = (ctx.out / "metrics_matched.json").string();
  const std::string named_path = (ctx.out / "metrics_named.json").string();
  const std::string table_path = (ctx.out / "metrics.txt").string();
  const std::string bev_path = (ctx.out / "bev.png").string();

  // BEV renders named labels; unlabeled points fall to the background color.
  std::vector<int> bev_labels(ctx.labeling.point_name.size(), -1);
  std::map<std::string, int> id_of_name;
  for (std::size_t c = 0; c < ctx.scene.class_names.size(); ++c)
    id_of_name[ctx.scene.class_names[c]] = static_cast<int>(c);
  for (std::size_t i = 0; i < ctx.labeling.point_name.size(); ++i) {
    if (!ctx.labeling.point_name[i].has_value()) continue;
    const auto it = id_of_name.find(*ctx.labeling.point_name[i]);
    if (it != id_of_name.end()) bev_labels[i] = it->second;
  }
  BevConfig bev_cfg;
  bev_cfg.image_size = ctx.cfg.bev_size;
  export_bev(bev_path, ctx.scene.cloud, bev_labels, bev_cfg);

  if (!ctx.scene.cloud.has_gt()) {
    write_text_file(matched_path, "{\"skipped\": \"scene has no ground truth\"}\n");
    write_text_file(named_path, "{\"skipped\": \"scene has no ground truth\"}\n");
    write_text_file(table_path, "no ground truth; metrics skipped\n");
    return;
  }

  result.matched = evaluate_matched(ctx.labeling.cluster_of_point, ctx.scene.cloud.gt_class);
  result.named =
      evaluate_named(ctx.labeling.point_name, ctx.scene.cloud.gt_class, ctx.scene.class_names);
  result.has_metrics = true;

  write_text_file(matched_path, metric_report_to_json(result.matched));
  write_text_file(named_path, metric_report_to_json(result.named));
  write_text_file(table_path,
                  "matched (Hungarian) evaluation\n" +
                      metric_report_table(result.matched, ctx.scene.class_names) +
                      "\nnamed (voted) evaluation\n" +
                      metric_report_table(result.named, ctx.scene.class_names));
}

}  // namespace

const std::vector<std::string>& pipeline_stage_names() { return kStages; }

PipelineResult run_pipeline(const PipelineConfig& cfg, const std::string& stop_stage) {
  cfg.validate();
  const std::string stop = stop_stage.empty() ? kStages.back() : stop_stage;
  if (std::find(kStages.begin(), kStages.end(), stop) == kStages.end())
    throw ConfigError("unknown stage: " + stop);

  StageContext ctx{cfg};
  ctx.out = fs::path(cfg.out_dir);
  fs::create_directories(ctx.out);
  try {
    ctx.scene = load_scene(cfg.scene_dir);
  } catch (const Error& e) {
    throw StageError("load-scene", digest_file((fs::path(cfg.scene_dir) / "cloud.ddsp").string()),
                     e.what());
  }

  PipelineResult result;
  for (const std::string& stage : kStages) {
    try {
      if (stage == "teacher") stage_teacher(ctx);
      else if (stage == "distill") stage_distill(ctx);
      else if (stage == "superpoint") stage_superpoint(ctx);
      else if (stage == "diffusion") stage_diffusion(ctx);
      else if (stage == "primitives") stage_primitives(ctx);
      else if (stage == "vote") stage_vote(ctx);
      else if (stage == "metrics") stage_metrics(ctx, result);
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      // Digest of the primary upstream artifact identifies the failing input.
      static const std::map<std::string, std::string> kInput = {
          {"teacher", "cloud.ddsp"},        {"distill", "teacher.ddst"},
          {"superpoint", "teacher.ddst"},   {"diffusion", "pooled.ddsh"},
          {"primitives", "diffused.ddsh"},  {"vote", "pseudo_labels.json"},
          {"metrics", "cluster_names.json"}};
      std::string input = (ctx.out / kInput.at(stage)).string();
      if (stage == "teacher") input = (fs::path(cfg.scene_dir) / "cloud.ddsp").string();
      throw StageError(stage, digest_file(input), e.what());
    }
    result.last_stage = stage;
    if (stage == "superpoint") result.num_superpoints = ctx.partition.count;
    if (stage == "primitives")
      result.num_primitives = static_cast<int>(ctx.primitives.centers.rows());
    if (stage == stop) break;
  }
  return result;
}

}  // namespace dds
