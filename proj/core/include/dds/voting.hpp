#ifndef DDS_VOTING_HPP
#define DDS_VOTING_HPP

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace dds {

/// Category-agnostic point clustering plus (after voting) semantic names.
struct ClusterLabeling {
  std::vector<int> cluster_of_point;                   // values in [0, num_clusters)
  int num_clusters = 0;
  std::vector<std::optional<std::string>> cluster_name; // absent = unlabeled
  std::vector<std::optional<std::string>> point_name;   // filled by propagate()
};

/// Cluster-by-label vote counts and normalized ratios. Label columns are
/// ordered lexicographically over the observed label strings.
struct VoteTable {
  std::vector<std::string> labels;
  Eigen::MatrixXi counts;  // K_c x Q
  Eigen::MatrixXd ratios;  // counts / (row sum + eps)
  double eta = 0.5;        // confidence threshold for assign_semantics
};

/// Cluster-to-class matching and the standard unsupervised metrics.
struct MetricReport {
  double oacc = 0.0;
  double macc = 0.0;
  double miou = 0.0;
  std::vector<int> class_ids;        // evaluated (ground-truth) classes
  std::vector<double> per_class_iou; // parallel to class_ids
  std::vector<double> per_class_acc; // parallel to class_ids
  std::vector<int> matching;         // per cluster: class id or -1 (void)
  double unlabeled_fraction = 0.0;   // named mode only
};

/// Aggregates the per-point candidate label multisets at the cluster level.
/// `eps` guards the ratio denominator.
VoteTable collect_votes(const ClusterLabeling& clusters,
                        const std::vector<std::vector<std::string>>& point_labels,
                        double eta = 0.5, double eps = 1e-8);

/// Majority vote per cluster: the argmax label when its ratio reaches eta,
/// otherwise unlabeled. Ties go to the lowest label index.
std::vector<std::optional<std::string>> assign_semantics(const VoteTable& votes);

/// Copies cluster names down to the points.
ClusterLabeling propagate(const ClusterLabeling& clusters,
                          const std::vector<std::optional<std::string>>& assignments);

/// Hungarian-matched evaluation of category-agnostic cluster ids against
/// ground-truth class ids: clusters are matched one-to-one to classes
/// maximizing total intersection, unmatched clusters count as errors.
MetricReport evaluate_matched(const std::vector<int>& pred_clusters,
                              const std::vector<int>& gt_classes);

/// Direct named evaluation: point names are compared against class names by
/// index in `class_names`; unlabeled or unknown names count as errors.
MetricReport evaluate_named(const std::vector<std::optional<std::string>>& pred_names,
                            const std::vector<int>& gt_classes,
                            const std::vector<std::string>& class_names);

/// Minimum-cost assignment on a dense cost matrix (rows <= cols after an
/// internal transpose). Returns, for each row, the assigned column.
std::vector<int> hungarian_min_cost(const Eigen::MatrixXd& cost);

std::string metric_report_to_json(const MetricReport& report);

/// Aligned-column text table, one row per evaluated class.
std::string metric_report_table(const MetricReport& report,
                                const std::vector<std::string>& class_names = {});

}  // namespace dds

#endif
