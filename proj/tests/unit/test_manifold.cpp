#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cosparse/cg_solver.hpp"
#include "cosparse/errors.hpp"
#include "cosparse/manifold.hpp"
#include "oracles.hpp"

using namespace cosparse;

namespace {

ManifoldPoint random_point(Eigen::Index n, Eigen::Index k, std::mt19937_64& rng) {
  return project_to_manifold(oracle::gaussian(n, k, rng));
}

TangentVector random_tangent(const ManifoldPoint& x, std::mt19937_64& rng, double scale = 1.0) {
  return tangent_project(x, scale * oracle::gaussian(x.dimension(), x.count(), rng));
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST_CASE("project_to_manifold centers and normalizes columns") {
  Eigen::MatrixXd raw(3, 3);
  raw.col(0) = vec({1, -1, 0}) / std::sqrt(2.0);
  raw.col(1) = vec({2, 0, 0});
  raw.col(2) = vec({0.5, 3, -1});
  const ManifoldPoint p = project_to_manifold(raw);
  CHECK((p.columns().col(0) - raw.col(0)).norm() < 1e-15);
  CHECK((p.columns().col(1) - vec({2, -1, -1}) / std::sqrt(6.0)).norm() < 1e-15);
  CHECK(constraint_violation(p.columns()) < 1e-15);

  Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(3, 1, 0.7);
  CHECK_THROWS_AS(project_to_manifold(flat), DegenerateColumn);
  CHECK_THROWS_AS(ManifoldPoint::from_columns(raw), InvalidArgument);
}

TEST_CASE("tangent projection matches the Gram-Schmidt projector") {
  std::mt19937_64 rng(11);
  Eigen::MatrixXd x0(3, 1);
  x0.col(0) = vec({1, -1, 0}) / std::sqrt(2.0);
  const ManifoldPoint x = ManifoldPoint::from_columns(x0);

  const Eigen::MatrixXd e1 = vec({1, 0, 0});
  const TangentVector t = tangent_project(x, e1);
  CHECK(std::abs(t.columns.col(0).dot(x0.col(0))) < 1e-15);
  CHECK(std::abs(t.columns.sum()) < 1e-15);
  const Eigen::MatrixXd span = oracle::gram_schmidt({Eigen::VectorXd::Ones(3), x0.col(0)});
  const Eigen::VectorXd residual = e1 - t.columns;
  CHECK((residual - span * (span.transpose() * residual)).norm() < 1e-15);

  CHECK(tangent_project(x, x0).columns.norm() < 1e-15);
  CHECK(tangent_project(x, Eigen::MatrixXd::Ones(3, 1)).columns.norm() < 1e-15);

  for (int trial = 0; trial < 20; ++trial) {
    const ManifoldPoint p = random_point(7, 4, rng);
    const Eigen::MatrixXd g = oracle::gaussian(7, 4, rng);
    const TangentVector once = tangent_project(p, g);
    const TangentVector twice = tangent_project(p, once.columns);
    CHECK((once.columns - twice.columns).norm() < 1e-13);
    for (Eigen::Index c = 0; c < 4; ++c) {
      const Eigen::MatrixXd proj = oracle::tangent_projector(p.columns().col(c));
      CHECK((proj * g.col(c) - once.columns.col(c)).norm() < 1e-12);
    }
  }
}

TEST_CASE("tangent projector is a symmetric idempotent of rank n-2") {
  std::mt19937_64 rng(12);
  const ManifoldPoint p = random_point(6, 1, rng);
  Eigen::MatrixXd dense(6, 6);
  for (int i = 0; i < 6; ++i) {
    dense.col(i) = tangent_project(p, Eigen::MatrixXd::Identity(6, 6).col(i)).columns.col(0);
  }
  CHECK((dense - dense.transpose()).norm() < 1e-14);
  CHECK((dense * dense - dense).norm() < 1e-14);
  CHECK(std::abs(dense.trace() - 4.0) < 1e-13);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(dense);
  lu.setThreshold(1e-10);
  CHECK(lu.rank() == 4);
}

TEST_CASE("geodesic follows the great circle") {
  Eigen::MatrixXd x0(3, 1), h0(3, 1);
  x0.col(0) = vec({1, -1, 0}) / std::sqrt(2.0);
  h0.col(0) = vec({1, 1, -2}) / std::sqrt(6.0);
  const ManifoldPoint x = ManifoldPoint::from_columns(x0);
  const TangentVector h{h0};
  const ManifoldPoint y = geodesic(x, h, 0.3);
  CHECK(constraint_violation(y.columns()) < 1e-15);
  const auto ode = oracle::integrate_geodesic(x0, h0, h0, 0.3, 200);
  CHECK((y.columns() - ode.x).norm() < 1e-8);

  CHECK((geodesic(x, TangentVector{Eigen::MatrixXd::Zero(3, 1)}, 5.0).columns() - x0).norm() == 0.0);
  CHECK((geodesic(x, h, 2.0 * std::numbers::pi).columns() - x0).norm() < 1e-14);
  CHECK((geodesic(x, h, 0.0).columns() - x0).norm() == 0.0);

  const double dt = 1e-6;
  const Eigen::MatrixXd velocity = (geodesic(x, h, dt).columns() - geodesic(x, h, -dt).columns()) / (2 * dt);
  CHECK((velocity - h0).norm() < 1e-8);
}

TEST_CASE("geodesics stay on the manifold without renormalization") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const ManifoldPoint x = random_point(9, 16, rng);
    const TangentVector h = random_tangent(x, rng, 3.0);
    std::uniform_real_distribution<double> t(-5.0, 5.0);
    CHECK(constraint_violation(geodesic(x, h, t(rng)).columns()) < 1e-10);
  }
}

TEST_CASE("parallel transport matches the transport ODE and is an isometry") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 10; ++trial) {
    const ManifoldPoint x = random_point(5, 3, rng);
    const TangentVector h = random_tangent(x, rng);
    const TangentVector v = random_tangent(x, rng);
    const TangentVector w = random_tangent(x, rng);
    const double t = 0.7;
    const TangentVector pv = parallel_transport(x, h, t, v);
    const TangentVector pw = parallel_transport(x, h, t, w);
    const auto ode = oracle::integrate_geodesic(x.columns(), h.columns, v.columns, t, 400);
    CHECK((pv.columns - ode.v).norm() < 1e-8);
    CHECK(std::abs(inner(pv, pw) - inner(v, w)) < 1e-12);

    const ManifoldPoint y = geodesic(x, h, t);
    for (Eigen::Index c = 0; c < 3; ++c) {
      CHECK(std::abs(pv.columns.col(c).dot(y.columns().col(c))) < 1e-12);
      CHECK(std::abs(pv.columns.col(c).sum()) < 1e-12);
    }
    CHECK((parallel_transport(x, h, 0.0, v).columns - v.columns).norm() < 1e-15);

    const TangentVector ph = parallel_transport(x, h, t, h);
    for (Eigen::Index c = 0; c < 3; ++c) {
      const double s = h.columns.col(c).norm();
      const Eigen::VectorXd velocity =
          h.columns.col(c) * std::cos(s * t) - x.columns().col(c) * s * std::sin(s * t);
      CHECK((ph.columns.col(c) - velocity).norm() < 1e-12);
    }
  }
}

TEST_CASE("hybrid beta follows the scalar formulas and clamps at zero") {
  std::mt19937_64 rng(15);
  const ManifoldPoint x = random_point(6, 3, rng);
  const TangentVector g = random_tangent(x, rng);
  const TangentVector go = random_tangent(x, rng);
  const TangentVector d{-go.columns + 0.3 * g.columns};

  double gg = 0.0, g_diff = 0.0, d_diff = 0.0;
  for (Eigen::Index c = 0; c < 3; ++c) {
    for (Eigen::Index i = 0; i < 6; ++i) {
      const double diff = g.columns(i, c) - go.columns(i, c);
      gg += g.columns(i, c) * g.columns(i, c);
      g_diff += g.columns(i, c) * diff;
      d_diff += d.columns(i, c) * diff;
    }
  }
  const double expected = std::max(0.0, std::min(gg / d_diff, g_diff / d_diff));
  CHECK(cg_beta_hybrid(g, go, d) == doctest::Approx(expected).epsilon(1e-14));

  // Gradient change orthogonal to the new gradient: the HS numerator vanishes.
  TangentVector p = random_tangent(x, rng);
  p.columns -= (inner(p, g) / inner(g, g)) * g.columns;
  CHECK(std::abs(cg_beta_hybrid(g, TangentVector{g.columns + p.columns}, TangentVector{-p.columns})) < 1e-14);
  // No gradient change at all leaves 0/0, reported as a vanishing denominator.
  CHECK_THROWS_AS(cg_beta_hybrid(g, g, d), ZeroDenominator);
  // A negative denominator makes β_DY negative.
  CHECK(cg_beta_hybrid(g, go, TangentVector{(d_diff > 0 ? -1.0 : 1.0) * d.columns}) == 0.0);
}

namespace {

struct ConstantObjective {
  int gradient_calls = 0;
  double value(const ManifoldPoint&) const { return 3.0; }
  double value_and_gradient(const ManifoldPoint& x, Eigen::MatrixXd& g) {
    ++gradient_calls;
    g = Eigen::MatrixXd::Zero(x.dimension(), x.count());
    return 3.0;
  }
};

struct LinearObjective {
  Eigen::VectorXd target;
  double value(const ManifoldPoint& x) const { return -x.columns().col(0).dot(target); }
  double value_and_gradient(const ManifoldPoint& x, Eigen::MatrixXd& g) const {
    g = -target;
    return value(x);
  }
};

struct RayleighObjective {
  Eigen::MatrixXd a;
  double value(const ManifoldPoint& x) const {
    const Eigen::VectorXd v = x.columns().col(0);
    return v.dot(a * v);
  }
  double value_and_gradient(const ManifoldPoint& x, Eigen::MatrixXd& g) const {
    g = 2.0 * a * x.columns();
    return value(x);
  }
};

}  // namespace

TEST_CASE("cg on a constant objective stops after one gradient evaluation") {
  std::mt19937_64 rng(16);
  ConstantObjective f;
  const ManifoldPoint start = random_point(4, 2, rng);
  const auto report = minimize_cg(ConstraintManifold{}, f, start, SolverConfig{});
  CHECK(report.status == SolveStatus::converged);
  CHECK(report.iterations == 0);
  CHECK(f.gradient_calls == 1);
  CHECK(report.point.columns() == start.columns());
}

TEST_CASE("cg maximizes a linear functional at the projected target") {
  std::mt19937_64 rng(17);
  const Eigen::VectorXd raw = oracle::gaussian(6, 1, rng);
  const Eigen::VectorXd target = oracle::centered_unit_columns(raw);
  LinearObjective f{target};
  const auto report = minimize_cg(ConstraintManifold{}, f, random_point(6, 1, rng),
                                  SolverConfig{500, 1e-10, 0.5, 0.1, 1.0});
  CHECK(report.status == SolveStatus::converged);
  CHECK((report.point.columns().col(0) - project_to_manifold(raw).columns().col(0)).norm() < 1e-6);
}

TEST_CASE("cg on a Rayleigh quotient agrees with a grid search over the feasible sphere") {
  std::mt19937_64 rng(18);
  const Eigen::MatrixXd b = oracle::gaussian(4, 4, rng);
  const Eigen::MatrixXd a = b * b.transpose();
  RayleighObjective f{a};
  const auto report = minimize_cg(ConstraintManifold{}, f, random_point(4, 1, rng),
                                  SolverConfig{1000, 1e-9, 0.5, 0.1, 1.0});

  // The feasible set is the unit sphere of 1⊥, a 2-sphere. Coarse grid, then refine.
  const Eigen::MatrixXd w = oracle::complement_of_ones(4);
  auto at = [&](double th, double ph) {
    const Eigen::Vector3d u(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
    const Eigen::VectorXd v = w * u;
    return v.dot(a * v);
  };
  double best = 1e300, bt = 0.0, bp = 0.0;
  double span_t = std::numbers::pi, span_p = 2.0 * std::numbers::pi, ct = span_t / 2, cp = span_p / 2;
  for (int round = 0; round < 6; ++round) {
    for (int i = 0; i <= 200; ++i) {
      for (int j = 0; j <= 200; ++j) {
        const double th = ct - span_t / 2 + span_t * i / 200.0;
        const double ph = cp - span_p / 2 + span_p * j / 200.0;
        const double v = at(th, ph);
        if (v < best) {
          best = v;
          bt = th;
          bp = ph;
        }
      }
    }
    ct = bt;
    cp = bp;
    span_t /= 20;
    span_p /= 20;
  }
  CHECK(std::abs(report.value - best) < 1e-4);
}

TEST_CASE("cg descends monotonically and reports its iterate count") {
  std::mt19937_64 rng(19);
  const Eigen::MatrixXd b = oracle::gaussian(5, 5, rng);
  RayleighObjective f{b + b.transpose()};
  double last = 1e300;
  bool monotone = true;
  int seen = 0;
  const auto report = minimize_cg(ConstraintManifold{}, f, random_point(5, 1, rng), SolverConfig{25},
                                  [&](const ManifoldPoint& x, double value, int) {
                                    monotone = monotone && value <= last;
                                    last = value;
                                    ++seen;
                                    CHECK(constraint_violation(x.columns()) < 1e-10);
                                  });
  CHECK(monotone);
  CHECK(seen == report.iterations + 1);
}

TEST_CASE("solver configuration is validated") {
  CHECK_THROWS_AS((SolverConfig{-1}.validate()), InvalidArgument);
  CHECK_THROWS_AS((SolverConfig{10, -1.0}.validate()), InvalidArgument);
  CHECK_THROWS_AS((SolverConfig{10, 1e-6, 1.5}.validate()), InvalidArgument);
  CHECK_THROWS_AS((SolverConfig{10, 1e-6, 0.5, 0.0}.validate()), InvalidArgument);
  CHECK_NOTHROW(SolverConfig{}.validate());
}
