#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cosparse/errors.hpp"
#include "cosparse/lie_group.hpp"
#include "oracles.hpp"

using namespace cosparse;

namespace {

constexpr GroupKind kGroups[] = {GroupKind::SO2, GroupKind::SE2, GroupKind::SA2, GroupKind::A2};

Eigen::Matrix3d random_matrix(std::mt19937_64& rng, double scale) {
  return scale * oracle::gaussian(3, 3, rng);
}

// Group invariants written out per group.
bool satisfies(const Eigen::Matrix3d& m, GroupKind g, double tol) {
  if (std::abs(m(2, 0)) > tol || std::abs(m(2, 1)) > tol || std::abs(m(2, 2) - 1.0) > tol) return false;
  const Eigen::Matrix2d a = m.topLeftCorner<2, 2>();
  const bool orthogonal = (a.transpose() * a - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() <= tol;
  const double det = a.determinant();
  switch (g) {
    case GroupKind::SO2:
      return orthogonal && std::abs(det - 1.0) <= tol && m.block<2, 1>(0, 2).cwiseAbs().maxCoeff() <= tol;
    case GroupKind::SE2:
      return orthogonal && std::abs(det - 1.0) <= tol;
    case GroupKind::SA2:
      return std::abs(det - 1.0) <= tol;
    case GroupKind::A2:
      return std::abs(det) > tol;
  }
  return false;
}

}  // namespace

TEST_CASE("exponential map on fixed elements") {
  for (GroupKind g : kGroups) {
    CHECK(exp_map(AlgebraElement(Eigen::Matrix3d::Zero(), g)).matrix() == Eigen::Matrix3d::Identity());
  }
  Eigen::Matrix3d t = Eigen::Matrix3d::Zero();
  t(0, 2) = 3.0;
  t(1, 2) = -1.0;
  Eigen::Matrix3d shift = Eigen::Matrix3d::Identity();
  shift(0, 2) = 3.0;
  shift(1, 2) = -1.0;
  CHECK((exp_map(AlgebraElement(t, GroupKind::SE2)).matrix() - shift).cwiseAbs().maxCoeff() < 1e-15);

  Eigen::Matrix3d quarter = Eigen::Matrix3d::Zero();
  quarter(0, 1) = -std::numbers::pi / 2;
  quarter(1, 0) = std::numbers::pi / 2;
  quarter(0, 2) = 1.0;
  const Eigen::Matrix3d e = exp_map(AlgebraElement(quarter, GroupKind::SE2)).matrix();
  CHECK((e - oracle::expm(quarter)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(e(0, 0)) < 1e-15);
  CHECK(e(1, 0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("exponential map lands in each group") {
  std::mt19937_64 rng(51);
  for (GroupKind g : kGroups) {
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::Matrix3d h = project_algebra(g, random_matrix(rng, 1.5));
      const Eigen::Matrix3d e = exp_map(AlgebraElement(h, g)).matrix();
      CHECK(satisfies(e, g, 1e-9));
      CHECK(in_group(e, g));
      CHECK((e - oracle::expm(h)).cwiseAbs().maxCoeff() < 1e-10 * (1.0 + e.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("projections reproduce the block formulas") {
  Eigen::Matrix3d x;
  x << 1, 2, 3, 4, 5, 6, 7, 8, 9;
  Eigen::Matrix3d so, se, sa, a;
  so << 0, -1, 0, 1, 0, 0, 0, 0, 0;
  se << 0, -1, 3, 1, 0, 6, 0, 0, 0;
  sa << -2, 2, 3, 4, 2, 6, 0, 0, 0;
  a << 1, 2, 3, 4, 5, 6, 0, 0, 0;
  CHECK(project_algebra(GroupKind::SO2, x) == so);
  CHECK(project_algebra(GroupKind::SE2, x) == se);
  CHECK(project_algebra(GroupKind::SA2, x) == sa);
  CHECK(project_algebra(GroupKind::A2, x) == a);

  Eigen::Matrix3d identity_block = Eigen::Matrix3d::Zero();
  identity_block.topLeftCorner<2, 2>().setIdentity();
  identity_block(0, 2) = 2.5;
  identity_block(1, 2) = -1.0;
  const Eigen::Matrix3d p = project_algebra(GroupKind::SA2, identity_block);
  CHECK(p.topLeftCorner<2, 2>().isZero(0.0));
  CHECK(p(0, 2) == 2.5);
  CHECK(p(1, 2) == -1.0);
}

TEST_CASE("projections are idempotent and land in the algebra") {
  std::mt19937_64 rng(52);
  for (GroupKind g : kGroups) {
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::Matrix3d once = project_algebra(g, random_matrix(rng, 3.0));
      CHECK((project_algebra(g, once) - once).cwiseAbs().maxCoeff() < 1e-15);
      CHECK(in_algebra(once, g));
    }
  }
  // The algebras nest like the groups.
  const Eigen::Matrix3d h = project_algebra(GroupKind::SE2, random_matrix(rng, 1.0));
  CHECK(in_algebra(h, GroupKind::SA2));
  CHECK(in_algebra(h, GroupKind::A2));
  CHECK_FALSE(in_algebra(h, GroupKind::SO2));
}

TEST_CASE("metric is an inner product compatible with the gradient") {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> pos(0.1, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    MetricWeights w;
    w.p << 1.3, 0.7, pos(rng), 0.7, 1.3, pos(rng), pos(rng), pos(rng), pos(rng);
    CHECK_NOTHROW(w.validate());
    const Eigen::Matrix3d a = random_matrix(rng, 1.0), b = random_matrix(rng, 1.0);
    CHECK(metric_inner(a, b, w) == doctest::Approx(metric_inner(b, a, w)).epsilon(1e-14));
    CHECK(metric_inner(a, a, w) > 0.0);
    const Eigen::Matrix3d r = random_matrix(rng, 1.0), h = random_matrix(rng, 1.0);
    const Eigen::Matrix3d scaled = r.cwiseProduct(w.reciprocal());
    CHECK(std::abs(metric_inner(scaled, h, w) - r.reshaped().dot(h.reshaped())) < 1e-12);
  }
  const MetricWeights balanced = MetricWeights::balanced(200.0);
  CHECK(balanced.p(0, 2) == doctest::Approx(1.0 / 200.0));
  CHECK(balanced.p(0, 0) == 1.0);
  MetricWeights bad;
  bad.p(0, 1) = 2.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = MetricWeights{};
  bad.p(2, 2) = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("group elements") {
  CHECK(parse_group("se2") == GroupKind::SE2);
  CHECK(parse_group("A2") == GroupKind::A2);
  CHECK(to_string(GroupKind::SA2) == "SA2");
  CHECK_THROWS_AS(parse_group("SL3"), InvalidArgument);

  Eigen::Matrix3d shear = Eigen::Matrix3d::Identity();
  shear(0, 1) = 0.5;
  CHECK_THROWS_AS(GroupElement(shear, GroupKind::SE2), InvalidArgument);
  CHECK_NOTHROW(GroupElement(shear, GroupKind::SA2));

  const GroupElement r = rigid_transform(2.0, -3.0, 30.0);
  const GroupElement s(shear, GroupKind::SA2);
  CHECK((r * s).group() == GroupKind::SA2);
  CHECK(((r * r.inverse()).matrix() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-15);
  const RigidParameters p = rigid_parameters(r);
  CHECK(p.tx == doctest::Approx(2.0));
  CHECK(p.ty == doctest::Approx(-3.0));
  CHECK(p.theta_deg == doctest::Approx(30.0));
}
