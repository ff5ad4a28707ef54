#include "dds/distill.hpp"

#include <algorithm>
#include <cmath>

#include "dds/errors.hpp"

namespace dds {

namespace {

constexpr double kNormFloor = 1e-12;

double checked_norm(const Eigen::RowVectorXd& row, const char* what) {
  const double n = row.norm();
  if (n < kNormFloor) throw DegenerateNorm(std::string(what) + " has norm below 1e-12");
  return n;
}

/// d(1 - cos(z, t))/dz = -(t_hat - cos * z_hat) / |z|. The reported cosine
/// is clamped into [-1, 1] so loss values cannot drift below zero.
Eigen::RowVectorXd cosine_grad(const Eigen::RowVectorXd& z, const Eigen::RowVectorXd& t,
                               double* cos_out) {
  const double nz = checked_norm(z, "student row");
  const double nt = checked_norm(t, "teacher row");
  const Eigen::RowVectorXd zh = z / nz;
  const Eigen::RowVectorXd th = t / nt;
  const double c = zh.dot(th);
  if (cos_out) *cos_out = std::clamp(c, -1.0, 1.0);
  return -(th - c * zh) / nz;
}

}  // namespace

PrototypePair compute_prototypes(const StudentField& student, const TeacherField& teacher,
                                 const MaskGroups& groups, int min_mask_points) {
  if (student.features.rows() != teacher.features.rows() ||
      student.features.cols() != teacher.features.cols())
    throw Error("student and teacher fields must have identical shape");

  const Eigen::Index c = student.features.cols();
  std::vector<Eigen::RowVectorXd> ps, pt;
  std::vector<int> sizes, source;
  for (std::size_t m = 0; m < groups.groups.size(); ++m) {
    Eigen::RowVectorXd sum_s = Eigen::RowVectorXd::Zero(c);
    Eigen::RowVectorXd sum_t = Eigen::RowVectorXd::Zero(c);
    int count = 0;
    for (int i : groups.groups[m].points) {
      if (!teacher.visible[static_cast<std::size_t>(i)]) continue;
      sum_s += student.features.row(i);
      sum_t += teacher.features.row(i);
      ++count;
    }
    if (count < min_mask_points) continue;
    ps.push_back(sum_s / count);
    pt.push_back(sum_t / count);
    sizes.push_back(count);
    source.push_back(static_cast<int>(m));
  }
  if (ps.empty()) throw EmptyPrototypeSet("no mask survived the minimum-size filter");

  PrototypePair out;
  out.student.resize(static_cast<Eigen::Index>(ps.size()), c);
  out.teacher.resize(static_cast<Eigen::Index>(pt.size()), c);
  for (std::size_t m = 0; m < ps.size(); ++m) {
    out.student.row(static_cast<Eigen::Index>(m)) = ps[m];
    out.teacher.row(static_cast<Eigen::Index>(m)) = pt[m];
  }
  out.mask_sizes = std::move(sizes);
  out.source_group = std::move(source);
  return out;
}

LossResult loss_point(const StudentField& student, const TeacherField& teacher) {
  if (student.features.rows() != teacher.features.rows() ||
      student.features.cols() != teacher.features.cols())
    throw Error("student and teacher fields must have identical shape");

  const Eigen::Index n = student.features.rows();
  LossResult out;
  out.grad = Eigen::MatrixXd::Zero(n, student.features.cols());

  int num_visible = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (teacher.visible[static_cast<std::size_t>(i)]) ++num_visible;
  if (num_visible == 0) return out;  // empty mean: zero loss, zero gradient

  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!teacher.visible[static_cast<std::size_t>(i)]) continue;
    double c = 0.0;
    out.grad.row(i) = cosine_grad(student.features.row(i), teacher.features.row(i), &c);
    sum += 1.0 - c;
  }
  out.value = sum / num_visible;
  out.grad /= static_cast<double>(num_visible);
  return out;
}

LossResult loss_proto(const PrototypePair& protos) {
  const Eigen::Index m = protos.count();
  LossResult out;
  out.grad = Eigen::MatrixXd::Zero(m, protos.student.cols());
  double sum = 0.0;
  for (Eigen::Index r = 0; r < m; ++r) {
    double c = 0.0;
    out.grad.row(r) = cosine_grad(protos.student.row(r), protos.teacher.row(r), &c);
    sum += 1.0 - c;
  }
  out.value = sum / static_cast<double>(m);
  out.grad /= static_cast<double>(m);
  return out;
}

LossResult loss_nce(const PrototypePair& protos, double tau) {
  if (tau <= 0.0) throw Error("tau must be positive");
  const Eigen::Index m = protos.count();
  const Eigen::Index c = protos.student.cols();

  Eigen::MatrixXd sh(m, c), th(m, c);  // row-normalized prototypes
  Eigen::VectorXd snorm(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    snorm[r] = checked_norm(protos.student.row(r), "student prototype");
    sh.row(r) = protos.student.row(r) / snorm[r];
    th.row(r) = protos.teacher.row(r) / checked_norm(protos.teacher.row(r), "teacher prototype");
  }
  const Eigen::MatrixXd s = sh * th.transpose();  // similarity matrix

  LossResult out;
  out.grad = Eigen::MatrixXd::Zero(m, c);
  double sum = 0.0;
  for (Eigen::Index r = 0; r < m; ++r) {
    // Row softmax with log-sum-exp stabilization.
    const double rowmax = s.row(r).maxCoeff() / tau;
    double expsum = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) expsum += std::exp(s(r, j) / tau - rowmax);
    const double lse = rowmax + std::log(expsum);
    sum += lse - s(r, r) / tau;

    // dL/dS_rj = (softmax_rj - [j==r]) / (M*tau); chain through the student
    // row normalization: dS_rj/dp_r = (t_hat_j - S_rj * p_hat_r) / |p_r|.
    for (Eigen::Index j = 0; j < m; ++j) {
      double g = std::exp(s(r, j) / tau - lse);
      if (j == r) g -= 1.0;
      g /= static_cast<double>(m) * tau;
      out.grad.row(r) += g * (th.row(j) - s(r, j) * sh.row(r)) / snorm[r];
    }
  }
  out.value = sum / static_cast<double>(m);
  return out;
}

LossResult loss_total(const StudentField& student, const TeacherField& teacher,
                      const MaskGroups& groups, const DistillWeights& weights,
                      int min_mask_points) {
  LossResult out;
  out.grad = Eigen::MatrixXd::Zero(student.features.rows(), student.features.cols());

  if (weights.lambda_point != 0.0) {
    const LossResult lp = loss_point(student, teacher);
    out.value += weights.lambda_point * lp.value;
    out.grad += weights.lambda_point * lp.grad;
  }

  // Prototype terms are skipped entirely at zero weight.
  if (weights.lambda_proto == 0.0 && weights.lambda_nce == 0.0) return out;

  const PrototypePair protos = compute_prototypes(student, teacher, groups, min_mask_points);
  Eigen::MatrixXd proto_grad = Eigen::MatrixXd::Zero(protos.count(), protos.student.cols());
  if (weights.lambda_proto != 0.0) {
    const LossResult lpr = loss_proto(protos);
    out.value += weights.lambda_proto * lpr.value;
    proto_grad += weights.lambda_proto * lpr.grad;
  }
  if (weights.lambda_nce != 0.0) {
    const LossResult ln = loss_nce(protos, weights.tau);
    out.value += weights.lambda_nce * ln.value;
    proto_grad += weights.lambda_nce * ln.grad;
  }

  // Each contributing point row receives grad_prototype / |V_m| because the
  // prototype is the mean of its visible member rows.
  for (Eigen::Index r = 0; r < protos.count(); ++r) {
    const auto& group = groups.groups[static_cast<std::size_t>(protos.source_group[r])];
    const double scale = 1.0 / protos.mask_sizes[static_cast<std::size_t>(r)];
    for (int i : group.points) {
      if (!teacher.visible[static_cast<std::size_t>(i)]) continue;
      out.grad.row(i) += scale * proto_grad.row(r);
    }
  }
  return out;
}

}  // namespace dds
