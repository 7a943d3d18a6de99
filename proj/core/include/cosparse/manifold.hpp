#pragma once

#include <Eigen/Dense>

namespace cosparse {

struct TangentVector;

/// A point of (S^{n-1} ∩ 1⊥)^k, stored as an n×k matrix. Each column is one
/// operator row: unit length and zero-mean.
class ManifoldPoint {
 public:
  ManifoldPoint() = default;

  /// Adopts columns that already satisfy the constraints; throws
  /// InvalidArgument when some column is off the manifold by more than `tol`.
  static ManifoldPoint from_columns(Eigen::MatrixXd columns, double tol = 1e-10);

  const Eigen::MatrixXd& columns() const noexcept { return columns_; }
  Eigen::Index dimension() const noexcept { return columns_.rows(); }
  Eigen::Index count() const noexcept { return columns_.cols(); }

 private:
  explicit ManifoldPoint(Eigen::MatrixXd columns) : columns_(std::move(columns)) {}
  friend class ConstraintManifold;
  friend ManifoldPoint project_to_manifold(const Eigen::MatrixXd& raw);
  friend ManifoldPoint geodesic(const ManifoldPoint&, const TangentVector&, double);

  Eigen::MatrixXd columns_;
};

/// Element of the tangent space at some ManifoldPoint. Column i is orthogonal
/// to column i of the base point and to the all-ones vector. The base point is
/// not stored; every operation that needs it takes it explicitly.
struct TangentVector {
  Eigen::MatrixXd columns;
};

/// Largest constraint violation over all columns: max(|‖x‖−1|, |Σx|).
double constraint_violation(const Eigen::MatrixXd& columns);

/// Centers each column and scales it to unit norm.
/// Throws DegenerateColumn if a centered column has norm below 1e-12.
ManifoldPoint project_to_manifold(const Eigen::MatrixXd& raw);

/// Column-wise P_x y = (I − x xᵀ − 1 1ᵀ/n) y.
TangentVector tangent_project(const ManifoldPoint& base, const Eigen::MatrixXd& ambient);

/// Great-circle geodesic per column: x cos(‖h‖t) + h/‖h‖ sin(‖h‖t).
ManifoldPoint geodesic(const ManifoldPoint& base, const TangentVector& direction, double t);

/// Parallel transport of `payload` along geodesic(base, direction, ·) up to time t.
TangentVector parallel_transport(const ManifoldPoint& base, const TangentVector& direction,
                                 double t, const TangentVector& payload);

/// Sum of per-column Euclidean inner products.
double inner(const TangentVector& a, const TangentVector& b);

/// The constraint manifold as consumed by minimize_cg.
class ConstraintManifold {
 public:
  using Point = ManifoldPoint;
  using Tangent = TangentVector;
  using Ambient = Eigen::MatrixXd;

  Tangent project(const Point& x, const Ambient& g) const { return tangent_project(x, g); }
  Point geodesic(const Point& x, const Tangent& h, double t) const {
    return cosparse::geodesic(x, h, t);
  }
  Tangent transport(const Point& x, const Tangent& h, double t, const Tangent& v) const {
    return parallel_transport(x, h, t, v);
  }
  double inner(const Tangent& a, const Tangent& b) const { return cosparse::inner(a, b); }
  Tangent combine(double a, const Tangent& x, double b, const Tangent& y) const {
    return {a * x.columns + b * y.columns};
  }
  Eigen::Index restart_period(const Point& x) const { return x.dimension() * x.count(); }
};

/// Flat R^N with straight-line geodesics and identity transport.
class EuclideanSpace {
 public:
  using Point = Eigen::VectorXd;
  using Tangent = Eigen::VectorXd;
  using Ambient = Eigen::VectorXd;

  Tangent project(const Point&, const Ambient& g) const { return g; }
  Point geodesic(const Point& x, const Tangent& h, double t) const { return x + t * h; }
  Tangent transport(const Point&, const Tangent&, double, const Tangent& v) const { return v; }
  double inner(const Tangent& a, const Tangent& b) const { return a.dot(b); }
  Tangent combine(double a, const Tangent& x, double b, const Tangent& y) const {
    return a * x + b * y;
  }
  Eigen::Index restart_period(const Point& x) const { return x.size(); }
};

}  // namespace cosparse
