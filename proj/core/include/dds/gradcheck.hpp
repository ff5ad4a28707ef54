#ifndef DDS_GRADCHECK_HPP
#define DDS_GRADCHECK_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>

#include "dds/distill.hpp"

namespace dds {

/// Random distillation problem with row norms bounded away from zero and
/// every mask holding at least `group_points` visible points.
struct DistillInstance {
  StudentField student;
  TeacherField teacher;
  MaskGroups groups;
};

DistillInstance random_distill_instance(std::uint64_t seed, int max_points = 100,
                                        int max_masks = 10, int max_channels = 16,
                                        int group_points = 12);

/// Central finite differences of a scalar function over a matrix argument.
Eigen::MatrixXd finite_difference_grad(const std::function<double(const Eigen::MatrixXd&)>& value,
                                       const Eigen::MatrixXd& at, double step = 1e-5);

/// max_ij |a_ij - b_ij| / max(max_ij |b_ij|, 1e-12).
double max_relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Worst finite-difference mismatch per loss over `instances` random
/// problems; backs the `dds distill-check` subcommand.
struct GradCheckReport {
  double point = 0.0;
  double proto = 0.0;
  double nce = 0.0;
  double total = 0.0;

  double worst() const;
};

GradCheckReport run_distill_check(int instances, std::uint64_t seed,
                                  const DistillWeights& weights = {}, double step = 1e-5);

}  // namespace dds

#endif
