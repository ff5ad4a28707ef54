#include "dds/gradcheck.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "dds/errors.hpp"

namespace dds {

namespace {

constexpr int kMinMaskPoints = 10;

Eigen::RowVectorXd random_unit_row(int c, std::mt19937_64& rng, double min_scale,
                                   double max_scale) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::RowVectorXd row(c);
  do {
    for (int j = 0; j < c; ++j) row[j] = normal(rng);
  } while (row.norm() < 1e-6);
  std::uniform_real_distribution<double> scale(min_scale, max_scale);
  return row / row.norm() * scale(rng);
}

}  // namespace

DistillInstance random_distill_instance(std::uint64_t seed, int max_points, int max_masks,
                                        int max_channels, int group_points) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick_c(2, max_channels);
  const int c = pick_c(rng);

  std::uniform_int_distribution<int> pick_m(1, max_masks);
  int m = pick_m(rng);
  int n = std::max(group_points * m + 5, 30);
  if (n > max_points) {
    m = std::max(1, (max_points - 5) / group_points);
    n = group_points * m + 5;
  }
  std::uniform_int_distribution<int> extra(0, std::max(0, max_points - n));
  n += extra(rng);

  DistillInstance inst;
  inst.student.features.resize(n, c);
  inst.teacher.features = Eigen::MatrixXd::Zero(n, c);
  inst.teacher.visible.assign(static_cast<std::size_t>(n), false);
  inst.teacher.view_counts.assign(static_cast<std::size_t>(n), 0);
  inst.groups.point_mask.assign(static_cast<std::size_t>(n), -1);

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  // The first m * group_points shuffled points populate the masks and are
  // always visible; the rest flip a coin.
  inst.groups.groups.resize(static_cast<std::size_t>(m));
  std::size_t cursor = 0;
  for (int g = 0; g < m; ++g) {
    inst.groups.groups[static_cast<std::size_t>(g)].label = "mask_" + std::to_string(g);
    for (int k = 0; k < group_points; ++k, ++cursor) {
      const int i = order[cursor];
      inst.groups.groups[static_cast<std::size_t>(g)].points.push_back(i);
      inst.groups.point_mask[static_cast<std::size_t>(i)] = g;
      inst.teacher.visible[static_cast<std::size_t>(i)] = true;
    }
    std::sort(inst.groups.groups[static_cast<std::size_t>(g)].points.begin(),
              inst.groups.groups[static_cast<std::size_t>(g)].points.end());
  }
  std::bernoulli_distribution coin(0.8);
  for (; cursor < order.size(); ++cursor)
    inst.teacher.visible[static_cast<std::size_t>(order[cursor])] = coin(rng);

  for (int i = 0; i < n; ++i) {
    inst.student.features.row(i) = random_unit_row(c, rng, 0.5, 2.0);
    if (inst.teacher.visible[static_cast<std::size_t>(i)]) {
      inst.teacher.features.row(i) = random_unit_row(c, rng, 0.5, 2.0);
      inst.teacher.view_counts[static_cast<std::size_t>(i)] = 1;
    }
  }
  return inst;
}

Eigen::MatrixXd finite_difference_grad(const std::function<double(const Eigen::MatrixXd&)>& value,
                                       const Eigen::MatrixXd& at, double step) {
  Eigen::MatrixXd grad(at.rows(), at.cols());
  Eigen::MatrixXd probe = at;
  for (Eigen::Index i = 0; i < at.rows(); ++i) {
    for (Eigen::Index j = 0; j < at.cols(); ++j) {
      probe(i, j) = at(i, j) + step;
      const double up = value(probe);
      probe(i, j) = at(i, j) - step;
      const double down = value(probe);
      probe(i, j) = at(i, j);
      grad(i, j) = (up - down) / (2.0 * step);
    }
  }
  return grad;
}

double max_relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max(b.cwiseAbs().maxCoeff(), 1e-12);
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

double GradCheckReport::worst() const { return std::max({point, proto, nce, total}); }

GradCheckReport run_distill_check(int instances, std::uint64_t seed,
                                  const DistillWeights& weights, double step) {
  GradCheckReport report;
  for (int t = 0; t < instances; ++t) {
    const DistillInstance inst = random_distill_instance(seed + static_cast<std::uint64_t>(t));

    const LossResult lp = loss_point(inst.student, inst.teacher);
    const Eigen::MatrixXd fd_point = finite_difference_grad(
        [&](const Eigen::MatrixXd& z) { return loss_point({z}, inst.teacher).value; },
        inst.student.features, step);
    report.point = std::max(report.point, max_relative_error(lp.grad, fd_point));

    PrototypePair protos =
        compute_prototypes(inst.student, inst.teacher, inst.groups, kMinMaskPoints);
    const LossResult lpr = loss_proto(protos);
    const Eigen::MatrixXd fd_proto = finite_difference_grad(
        [&](const Eigen::MatrixXd& p) {
          PrototypePair perturbed = protos;
          perturbed.student = p;
          return loss_proto(perturbed).value;
        },
        protos.student, step);
    report.proto = std::max(report.proto, max_relative_error(lpr.grad, fd_proto));

    const LossResult ln = loss_nce(protos, weights.tau);
    const Eigen::MatrixXd fd_nce = finite_difference_grad(
        [&](const Eigen::MatrixXd& p) {
          PrototypePair perturbed = protos;
          perturbed.student = p;
          return loss_nce(perturbed, weights.tau).value;
        },
        protos.student, step);
    report.nce = std::max(report.nce, max_relative_error(ln.grad, fd_nce));

    const LossResult lt =
        loss_total(inst.student, inst.teacher, inst.groups, weights, kMinMaskPoints);
    const Eigen::MatrixXd fd_total = finite_difference_grad(
        [&](const Eigen::MatrixXd& z) {
          return loss_total({z}, inst.teacher, inst.groups, weights, kMinMaskPoints).value;
        },
        inst.student.features, step);
    report.total = std::max(report.total, max_relative_error(lt.grad, fd_total));
  }
  return report;
}

}  // namespace dds
