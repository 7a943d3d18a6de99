#include "cosparse/manifold.hpp"

#include <cmath>

#include "cosparse/errors.hpp"

namespace cosparse {

double constraint_violation(const Eigen::MatrixXd& columns) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < columns.cols(); ++j) {
    worst = std::max(worst, std::abs(columns.col(j).norm() - 1.0));
    worst = std::max(worst, std::abs(columns.col(j).sum()));
  }
  return worst;
}

ManifoldPoint ManifoldPoint::from_columns(Eigen::MatrixXd columns, double tol) {
  if (columns.rows() < 2) throw InvalidArgument("columns need at least two entries");
  const double violation = constraint_violation(columns);
  if (!(violation <= tol)) {
    throw InvalidArgument("columns violate unit-norm/zero-mean constraint by " +
                          std::to_string(violation));
  }
  return ManifoldPoint(std::move(columns));
}

ManifoldPoint project_to_manifold(const Eigen::MatrixXd& raw) {
  if (raw.rows() < 2) throw InvalidArgument("columns need at least two entries");
  Eigen::MatrixXd out = raw;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    auto col = out.col(j);
    col.array() -= col.mean();
    const double nrm = col.norm();
    if (!(nrm >= 1e-12)) {
      throw DegenerateColumn("column " + std::to_string(j) + " vanishes after centering");
    }
    col /= nrm;
  }
  return ManifoldPoint(std::move(out));
}

TangentVector tangent_project(const ManifoldPoint& base, const Eigen::MatrixXd& ambient) {
  const auto& x = base.columns();
  if (ambient.rows() != x.rows() || ambient.cols() != x.cols()) {
    throw DimensionMismatch("ambient matrix shape differs from base point");
  }
  Eigen::MatrixXd h = ambient;
  for (Eigen::Index j = 0; j < h.cols(); ++j) {
    auto col = h.col(j);
    // Dividing by xᵀx keeps roundoff in ‖x‖ from leaking a radial component
    // into h, which geodesic steps would otherwise amplify.
    col -= x.col(j) * (x.col(j).dot(col) / x.col(j).squaredNorm());
    col.array() -= col.mean();
  }
  return {std::move(h)};
}

ManifoldPoint geodesic(const ManifoldPoint& base, const TangentVector& direction, double t) {
  const auto& x = base.columns();
  Eigen::MatrixXd out = x;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double speed = direction.columns.col(j).norm();
    if (speed == 0.0) continue;
    const double angle = speed * t;
    out.col(j) = x.col(j) * std::cos(angle) + direction.columns.col(j) * (std::sin(angle) / speed);
  }
  return ManifoldPoint(std::move(out));
}

TangentVector parallel_transport(const ManifoldPoint& base, const TangentVector& direction,
                                 double t, const TangentVector& payload) {
  const auto& x = base.columns();
  Eigen::MatrixXd out = payload.columns;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double speed = direction.columns.col(j).norm();
    if (speed == 0.0) continue;
    const Eigen::VectorXd u = direction.columns.col(j) / speed;
    const double along = u.dot(payload.columns.col(j));
    const double angle = speed * t;
    out.col(j) += along * (-x.col(j) * std::sin(angle) + u * (std::cos(angle) - 1.0));
  }
  return {std::move(out)};
}

double inner(const TangentVector& a, const TangentVector& b) {
  return (a.columns.array() * b.columns.array()).sum();
}

}  // namespace cosparse
