#ifndef DDS_DISTILL_HPP
#define DDS_DISTILL_HPP

#include <Eigen/Dense>
#include <vector>

#include "dds/teacher.hpp"

namespace dds {

/// Student point features paired against a TeacherField of the same shape.
struct StudentField {
  Eigen::MatrixXd features;  // N x C
};

/// Mean student/teacher features per surviving mask. `source_group` maps each
/// prototype row back to its originating MaskGroups index so prototype-level
/// gradients can be redistributed to point rows.
struct PrototypePair {
  Eigen::MatrixXd student;        // M x C
  Eigen::MatrixXd teacher;        // M x C
  std::vector<int> mask_sizes;    // visible-point count per prototype
  std::vector<int> source_group;  // originating group index per prototype

  Eigen::Index count() const { return student.rows(); }
};

struct DistillWeights {
  double lambda_point = 1.0;
  double lambda_proto = 1.0;
  double lambda_nce = 0.3;
  double tau = 0.07;  // contrastive temperature
};

/// Loss value and its gradient. Gradients are taken w.r.t. student features
/// only; the teacher is a frozen constant.
struct LossResult {
  double value = 0.0;
  Eigen::MatrixXd grad;  // loss_point/loss_total: N x C; proto losses: M x C
};

/// Per-mask mean of the visible contributing rows. Masks with fewer than
/// `min_mask_points` visible points are omitted; throws EmptyPrototypeSet
/// when nothing survives.
PrototypePair compute_prototypes(const StudentField& student, const TeacherField& teacher,
                                 const MaskGroups& groups, int min_mask_points = 10);

/// Mean cosine misalignment over visible points.
LossResult loss_point(const StudentField& student, const TeacherField& teacher);

/// Mean cosine misalignment over prototype pairs; gradient w.r.t. student
/// prototype rows.
LossResult loss_proto(const PrototypePair& protos);

/// InfoNCE over the prototype similarity matrix: rows are student prototypes,
/// columns teacher prototypes, the diagonal is positive. Gradient w.r.t.
/// student prototype rows, taken through the row normalization.
LossResult loss_nce(const PrototypePair& protos, double tau);

/// Weighted sum of the three terms with prototype-level gradients pushed back
/// to point rows through the prototype mean.
LossResult loss_total(const StudentField& student, const TeacherField& teacher,
                      const MaskGroups& groups, const DistillWeights& weights,
                      int min_mask_points = 10);

}  // namespace dds

#endif
