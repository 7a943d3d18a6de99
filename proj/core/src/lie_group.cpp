#include "cosparse/lie_group.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include <unsupported/Eigen/MatrixFunctions>

#include "cosparse/errors.hpp"

namespace cosparse {

std::string_view to_string(GroupKind group) noexcept {
  switch (group) {
    case GroupKind::SO2: return "SO2";
    case GroupKind::SE2: return "SE2";
    case GroupKind::SA2: return "SA2";
    case GroupKind::A2: return "A2";
  }
  return "A2";
}

GroupKind parse_group(std::string_view text) {
  std::string upper(text);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
  if (upper == "SO2") return GroupKind::SO2;
  if (upper == "SE2") return GroupKind::SE2;
  if (upper == "SA2") return GroupKind::SA2;
  if (upper == "A2") return GroupKind::A2;
  throw InvalidArgument("unknown group '" + std::string(text) + "' (expected SO2, SE2, SA2 or A2)");
}

bool in_group(const Eigen::Matrix3d& m, GroupKind group, double tol) {
  if (!m.allFinite()) return false;
  if (std::abs(m(2, 0)) > tol || std::abs(m(2, 1)) > tol || std::abs(m(2, 2) - 1.0) > tol) return false;
  const Eigen::Matrix2d a = m.topLeftCorner<2, 2>();
  const double det = a.determinant();
  switch (group) {
    case GroupKind::SO2:
      if (std::abs(m(0, 2)) > tol || std::abs(m(1, 2)) > tol) return false;
      [[fallthrough]];
    case GroupKind::SE2:
      if ((a.transpose() * a - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() > tol) return false;
      return std::abs(det - 1.0) <= tol;
    case GroupKind::SA2:
      return std::abs(det - 1.0) <= tol;
    case GroupKind::A2:
      return std::abs(det) > tol;
  }
  return false;
}

bool in_algebra(const Eigen::Matrix3d& m, GroupKind group, double tol) {
  if (!m.allFinite()) return false;
  if (m.row(2).cwiseAbs().maxCoeff() > tol) return false;
  const Eigen::Matrix2d a = m.topLeftCorner<2, 2>();
  switch (group) {
    case GroupKind::SO2:
      if (std::abs(m(0, 2)) > tol || std::abs(m(1, 2)) > tol) return false;
      [[fallthrough]];
    case GroupKind::SE2:
      return (a + a.transpose()).cwiseAbs().maxCoeff() <= tol;
    case GroupKind::SA2:
      return std::abs(a.trace()) <= tol;
    case GroupKind::A2:
      return true;
  }
  return false;
}

GroupElement::GroupElement(const Eigen::Matrix3d& matrix, GroupKind group) : m_(matrix), group_(group) {
  if (!in_group(matrix, group)) {
    throw InvalidArgument("matrix is not an element of " + std::string(to_string(group)));
  }
}

GroupElement GroupElement::inverse() const {
  Eigen::Matrix3d inv = m_.inverse();
  inv.row(2) << 0.0, 0.0, 1.0;
  return {inv, group_};
}

GroupElement GroupElement::operator*(const GroupElement& other) const {
  Eigen::Matrix3d prod = m_ * other.m_;
  prod.row(2) << 0.0, 0.0, 1.0;
  return {prod, std::max(group_, other.group_)};
}

AlgebraElement::AlgebraElement(const Eigen::Matrix3d& matrix, GroupKind group) : m_(matrix), group_(group) {
  if (!in_algebra(matrix, group)) {
    throw InvalidArgument("matrix is not in the Lie algebra of " + std::string(to_string(group)));
  }
}

Eigen::Matrix3d project_algebra(GroupKind group, const Eigen::Matrix3d& x) {
  Eigen::Matrix3d out = Eigen::Matrix3d::Zero();
  const Eigen::Matrix2d x11 = x.topLeftCorner<2, 2>();
  const Eigen::Vector2d x12 = x.block<2, 1>(0, 2);
  switch (group) {
    case GroupKind::SO2:
      out.topLeftCorner<2, 2>() = 0.5 * (x11 - x11.transpose());
      break;
    case GroupKind::SE2:
      out.topLeftCorner<2, 2>() = 0.5 * (x11 - x11.transpose());
      out.block<2, 1>(0, 2) = x12;
      break;
    case GroupKind::SA2:
      out.topLeftCorner<2, 2>() = x11 - 0.5 * x11.trace() * Eigen::Matrix2d::Identity();
      out.block<2, 1>(0, 2) = x12;
      break;
    case GroupKind::A2:
      out.topLeftCorner<2, 2>() = x11;
      out.block<2, 1>(0, 2) = x12;
      break;
  }
  return out;
}

GroupElement exp_map(const AlgebraElement& h) {
  Eigen::Matrix3d e = h.matrix().exp();
  e.row(2) << 0.0, 0.0, 1.0;
  return {e, h.group()};
}

MetricWeights MetricWeights::balanced(double region_diagonal) {
  if (!(region_diagonal > 0.0)) throw InvalidArgument("region diagonal must be positive");
  MetricWeights w;
  w.p(0, 2) = w.p(1, 2) = 1.0 / region_diagonal;
  return w;
}

void MetricWeights::validate() const {
  if (!(p.minCoeff() > 0.0) || !p.allFinite()) throw InvalidArgument("metric weights must be positive");
  if (p(0, 0) != p(1, 1) || p(0, 1) != p(1, 0)) {
    throw InvalidArgument("metric weights need p11 = p22 and p12 = p21");
  }
}

double metric_inner(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b, const MetricWeights& w) {
  return (a.cwiseProduct(w.p) * b.transpose()).trace();
}

GroupElement rigid_transform(double tx, double ty, double theta_deg) {
  const double th = theta_deg * std::numbers::pi / 180.0;
  Eigen::Matrix3d m;
  m << std::cos(th), -std::sin(th), tx,
       std::sin(th), std::cos(th), ty,
       0.0, 0.0, 1.0;
  return {m, GroupKind::SE2};
}

RigidParameters rigid_parameters(const GroupElement& tau) {
  const auto& m = tau.matrix();
  return {m(0, 2), m(1, 2), std::atan2(m(1, 0), m(0, 0)) * 180.0 / std::numbers::pi};
}

}  // namespace cosparse
