#pragma once

#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace cosparse {

/// Planar transformation groups in 3×3 homogeneous form, SO2 ⊂ SE2 ⊂ SA2 ⊂ A2.
enum class GroupKind { SO2, SE2, SA2, A2 };

std::string_view to_string(GroupKind group) noexcept;
/// Accepts "SO2", "SE2", "SA2", "A2" (case-insensitive); throws InvalidArgument otherwise.
GroupKind parse_group(std::string_view text);

/// True when `m` lies in the group within `tol`.
bool in_group(const Eigen::Matrix3d& m, GroupKind group, double tol = 1e-9);
/// True when `m` lies in the group's Lie algebra within `tol`.
bool in_algebra(const Eigen::Matrix3d& m, GroupKind group, double tol = 1e-9);

class GroupElement {
 public:
  GroupElement() : GroupElement(Eigen::Matrix3d::Identity(), GroupKind::A2) {}
  /// Throws InvalidArgument when `matrix` is not in `group` (tolerance 1e-9).
  GroupElement(const Eigen::Matrix3d& matrix, GroupKind group);

  static GroupElement identity(GroupKind group) { return {Eigen::Matrix3d::Identity(), group}; }

  const Eigen::Matrix3d& matrix() const noexcept { return m_; }
  GroupKind group() const noexcept { return group_; }

  GroupElement inverse() const;
  /// Product within the larger of the two groups.
  GroupElement operator*(const GroupElement& other) const;

  Eigen::Vector2d translation() const { return m_.block<2, 1>(0, 2); }

 private:
  Eigen::Matrix3d m_;
  GroupKind group_;
};

class AlgebraElement {
 public:
  AlgebraElement() : AlgebraElement(Eigen::Matrix3d::Zero(), GroupKind::A2) {}
  /// Throws InvalidArgument when `matrix` is not in the algebra (tolerance 1e-9).
  AlgebraElement(const Eigen::Matrix3d& matrix, GroupKind group);

  const Eigen::Matrix3d& matrix() const noexcept { return m_; }
  GroupKind group() const noexcept { return group_; }

 private:
  Eigen::Matrix3d m_;
  GroupKind group_;
};

/// Orthogonal projection onto the group's algebra for a metric with
/// p11 = p22 and p12 = p21:
///   SO: [½(X11 − X11ᵀ) 0; 0 0]      SE: [½(X11 − X11ᵀ) x12; 0 0]
///   SA: [X11 − ½tr(X11)I₂ x12; 0 0]  A:  [X11 x12; 0 0]
Eigen::Matrix3d project_algebra(GroupKind group, const Eigen::Matrix3d& x);

GroupElement exp_map(const AlgebraElement& h);

/// Entry weights P of the inner product ⟨H₁, H₂⟩_P = tr((H₁ ⊙ P) H₂ᵀ).
struct MetricWeights {
  Eigen::Matrix3d p = Eigen::Matrix3d::Ones();

  /// Unit weights on the linear block, 1/diagonal on the translation column.
  static MetricWeights balanced(double region_diagonal);

  /// Throws InvalidArgument unless all entries are positive, p11 = p22 and p12 = p21.
  void validate() const;
  /// P̂, the entry-wise reciprocal of P.
  Eigen::Matrix3d reciprocal() const { return p.cwiseInverse(); }
};

double metric_inner(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b, const MetricWeights& w);

/// Rotation by `theta_deg` degrees followed by translation (tx, ty), as an SE2 element.
GroupElement rigid_transform(double tx, double ty, double theta_deg);

struct RigidParameters {
  double tx = 0.0;
  double ty = 0.0;
  double theta_deg = 0.0;
};

/// Translation and rotation angle (atan2 of the first column) of a transform.
RigidParameters rigid_parameters(const GroupElement& tau);

}  // namespace cosparse
