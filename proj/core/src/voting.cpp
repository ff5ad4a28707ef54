#include "dds/voting.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dds/errors.hpp"

namespace dds {

namespace {

/// Shared metric arithmetic once predictions are mapped to class ids
/// (-1 = void, always wrong).
void compute_metrics(const std::vector<int>& mapped, const std::vector<int>& gt,
                     MetricReport& report) {
  const std::size_t n = gt.size();
  std::set<int> class_set(gt.begin(), gt.end());
  report.class_ids.assign(class_set.begin(), class_set.end());

  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (mapped[i] == gt[i]) ++correct;
  report.oacc = static_cast<double>(correct) / static_cast<double>(n);

  report.per_class_iou.clear();
  report.per_class_acc.clear();
  for (int q : report.class_ids) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool p = mapped[i] == q;
      const bool g = gt[i] == q;
      if (p && g) ++tp;
      else if (p) ++fp;
      else if (g) ++fn;
    }
    report.per_class_iou.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp + fn));
    report.per_class_acc.push_back(static_cast<double>(tp) / static_cast<double>(tp + fn));
  }
  const auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  report.macc = mean(report.per_class_acc);
  report.miou = mean(report.per_class_iou);
}

}  // namespace

VoteTable collect_votes(const ClusterLabeling& clusters,
                        const std::vector<std::vector<std::string>>& point_labels, double eta,
                        double eps) {
  if (point_labels.size() != clusters.cluster_of_point.size())
    throw LengthMismatch("point label multisets and cluster assignment differ in length");

  std::set<std::string> vocab;
  for (const auto& labels : point_labels) vocab.insert(labels.begin(), labels.end());

  VoteTable table;
  table.eta = eta;
  table.labels.assign(vocab.begin(), vocab.end());
  std::map<std::string, int> column;
  for (std::size_t q = 0; q < table.labels.size(); ++q)
    column[table.labels[q]] = static_cast<int>(q);

  const int kc = clusters.num_clusters;
  const int nq = static_cast<int>(table.labels.size());
  table.counts = Eigen::MatrixXi::Zero(kc, nq);
  for (std::size_t i = 0; i < point_labels.size(); ++i) {
    const int k = clusters.cluster_of_point[i];
    if (k < 0 || k >= kc) throw Error("cluster index out of range");
    for (const auto& label : point_labels[i]) ++table.counts(k, column[label]);
  }

  table.ratios = Eigen::MatrixXd::Zero(kc, nq);
  for (int k = 0; k < kc; ++k) {
    const double total = static_cast<double>(table.counts.row(k).sum());
    for (int q = 0; q < nq; ++q)
      table.ratios(k, q) = static_cast<double>(table.counts(k, q)) / (total + eps);
  }
  return table;
}

std::vector<std::optional<std::string>> assign_semantics(const VoteTable& votes) {
  if (votes.eta < 0.0 || votes.eta > 1.0) throw Error("eta must lie in [0,1]");
  std::vector<std::optional<std::string>> names(static_cast<std::size_t>(votes.ratios.rows()));
  for (Eigen::Index k = 0; k < votes.ratios.rows(); ++k) {
    int best = -1;
    double best_r = -1.0;
    for (Eigen::Index q = 0; q < votes.ratios.cols(); ++q) {
      if (votes.ratios(k, q) > best_r) {  // ties keep the lowest label index
        best_r = votes.ratios(k, q);
        best = static_cast<int>(q);
      }
    }
    if (best >= 0 && best_r >= votes.eta)
      names[static_cast<std::size_t>(k)] = votes.labels[static_cast<std::size_t>(best)];
  }
  return names;
}

ClusterLabeling propagate(const ClusterLabeling& clusters,
                          const std::vector<std::optional<std::string>>& assignments) {
  if (static_cast<int>(assignments.size()) != clusters.num_clusters)
    throw LengthMismatch("assignment list does not match cluster count");
  ClusterLabeling out = clusters;
  out.cluster_name = assignments;
  out.point_name.resize(out.cluster_of_point.size());
  for (std::size_t i = 0; i < out.cluster_of_point.size(); ++i)
    out.point_name[i] = assignments[static_cast<std::size_t>(out.cluster_of_point[i])];
  return out;
}

std::vector<int> hungarian_min_cost(const Eigen::MatrixXd& cost) {
  const bool transposed = cost.rows() > cost.cols();
  Eigen::MatrixXd a = cost;
  if (transposed) a.transposeInPlace();
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(a.cols());
  const double inf = std::numeric_limits<double>::infinity();

  // Potentials form of the Hungarian algorithm, 1-indexed.
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1, 0.0);
  std::vector<int> match(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const int i0 = match[j0];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) { minv[j] = cur; way[j] = j0; }
        if (minv[j] < delta) { delta = minv[j]; j1 = j; }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) { u[match[j]] += delta; v[j] -= delta; }
        else minv[j] -= delta;
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(static_cast<std::size_t>(cost.rows()), -1);
  for (int j = 1; j <= m; ++j) {
    if (match[j] == 0) continue;
    if (transposed) row_to_col[static_cast<std::size_t>(j - 1)] = match[j] - 1;
    else row_to_col[static_cast<std::size_t>(match[j] - 1)] = j - 1;
  }
  return row_to_col;
}

MetricReport evaluate_matched(const std::vector<int>& pred_clusters,
                              const std::vector<int>& gt_classes) {
  if (pred_clusters.size() != gt_classes.size())
    throw LengthMismatch("prediction and ground truth differ in length");
  if (gt_classes.empty()) throw Error("evaluation needs at least one point");

  int kc = 0, max_class = -1;
  for (int p : pred_clusters) {
    if (p < 0) throw Error("cluster ids must be non-negative");
    kc = std::max(kc, p + 1);
  }
  for (int g : gt_classes) {
    if (g < 0) throw Error("class ids must be non-negative");
    max_class = std::max(max_class, g);
  }
  const int nq = max_class + 1;

  Eigen::MatrixXd intersection = Eigen::MatrixXd::Zero(kc, nq);
  for (std::size_t i = 0; i < pred_clusters.size(); ++i)
    intersection(pred_clusters[i], gt_classes[i]) += 1.0;

  MetricReport report;
  report.matching = hungarian_min_cost(-intersection);
  // Assignments with zero overlap carry no information; send them to void so
  // the matching is insensitive to how the solver breaks zero-gain ties.
  for (int k = 0; k < kc; ++k)
    if (report.matching[static_cast<std::size_t>(k)] >= 0 &&
        intersection(k, report.matching[static_cast<std::size_t>(k)]) == 0.0)
      report.matching[static_cast<std::size_t>(k)] = -1;

  std::vector<int> mapped(pred_clusters.size());
  for (std::size_t i = 0; i < pred_clusters.size(); ++i)
    mapped[i] = report.matching[static_cast<std::size_t>(pred_clusters[i])];
  compute_metrics(mapped, gt_classes, report);
  return report;
}

MetricReport evaluate_named(const std::vector<std::optional<std::string>>& pred_names,
                            const std::vector<int>& gt_classes,
                            const std::vector<std::string>& class_names) {
  if (pred_names.size() != gt_classes.size())
    throw LengthMismatch("prediction and ground truth differ in length");
  if (gt_classes.empty()) throw Error("evaluation needs at least one point");

  std::map<std::string, int> id_of_name;
  for (std::size_t c = 0; c < class_names.size(); ++c)
    id_of_name[class_names[c]] = static_cast<int>(c);

  std::vector<int> mapped(pred_names.size(), -1);
  std::size_t unlabeled = 0;
  for (std::size_t i = 0; i < pred_names.size(); ++i) {
    if (!pred_names[i].has_value()) { ++unlabeled; continue; }
    const auto it = id_of_name.find(*pred_names[i]);
    if (it != id_of_name.end()) mapped[i] = it->second;  // unknown names stay void
  }

  MetricReport report;
  report.unlabeled_fraction =
      static_cast<double>(unlabeled) / static_cast<double>(pred_names.size());
  compute_metrics(mapped, gt_classes, report);
  return report;
}

std::string metric_report_to_json(const MetricReport& report) {
  nlohmann::json j;
  j["oacc"] = report.oacc;
  j["macc"] = report.macc;
  j["miou"] = report.miou;
  j["class_ids"] = report.class_ids;
  j["per_class_iou"] = report.per_class_iou;
  j["per_class_acc"] = report.per_class_acc;
  j["matching"] = report.matching;
  j["unlabeled_fraction"] = report.unlabeled_fraction;
  return j.dump(2) + "\n";
}

std::string metric_report_table(const MetricReport& report,
                                const std::vector<std::string>& class_names) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << std::left << std::setw(16) << "class" << std::right << std::setw(10) << "acc"
     << std::setw(10) << "iou" << "\n";
  for (std::size_t c = 0; c < report.class_ids.size(); ++c) {
    const int id = report.class_ids[c];
    std::string name = "class_" + std::to_string(id);
    if (id >= 0 && static_cast<std::size_t>(id) < class_names.size()) name = class_names[id];
    os << std::left << std::setw(16) << name << std::right << std::setw(10)
       << report.per_class_acc[c] << std::setw(10) << report.per_class_iou[c] << "\n";
  }
  os << std::left << std::setw(16) << "oAcc" << std::right << std::setw(10) << report.oacc << "\n";
  os << std::left << std::setw(16) << "mAcc" << std::right << std::setw(10) << report.macc << "\n";
  os << std::left << std::setw(16) << "mIoU" << std::right << std::setw(10) << report.miou << "\n";
  return os.str();
}

}  // namespace dds
