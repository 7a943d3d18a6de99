#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <string>
#include <utility>

#include "cosparse/errors.hpp"
#include "cosparse/manifold.hpp"

namespace cosparse {

struct SolverConfig {
  int max_iterations = 100;
  double gradient_norm_tolerance = 1e-6;
  double armijo_shrink = 0.5;
  double armijo_slope = 0.1;
  double initial_step = 1.0;

  /// Throws InvalidArgument when a field is outside its admissible range.
  void validate() const;
};

enum class SolveStatus {
  converged,       // Riemannian gradient norm fell below the tolerance
  max_iterations,  // iteration budget exhausted
  stalled,         // no representable decrease left along steepest descent
};

template <class Point>
struct SolveReport {
  Point point;
  double value = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  int evaluations = 0;
  int restarts = 0;
  SolveStatus status = SolveStatus::max_iterations;
};

/// Hybrid Dai–Yuan / Hestenes–Stiefel update parameter, max(0, min(β_DY, β_HS)).
/// All three tangents must live at the new iterate. Throws ZeroDenominator when
/// ⟨Ψ(H), G_new − Ψ(G_old)⟩ is below 1e-14 in magnitude.
template <class Manifold>
double cg_beta_hybrid(const Manifold& m, const typename Manifold::Tangent& grad_new,
                      const typename Manifold::Tangent& grad_old_transported,
                      const typename Manifold::Tangent& dir_old_transported) {
  const auto diff = m.combine(1.0, grad_new, -1.0, grad_old_transported);
  const double denom = m.inner(dir_old_transported, diff);
  if (!(std::abs(denom) >= 1e-14)) {
    throw ZeroDenominator("conjugate direction is orthogonal to the gradient change");
  }
  const double beta_hs = m.inner(grad_new, diff) / denom;
  const double beta_dy = m.inner(grad_new, grad_new) / denom;
  return std::max(0.0, std::min(beta_dy, beta_hs));
}

double cg_beta_hybrid(const TangentVector& grad_new, const TangentVector& grad_old_transported,
                      const TangentVector& dir_old_transported);

struct NoObserver {
  template <class Point>
  void operator()(const Point&, double, int) const {}
};

/// Objective requirements for minimize_cg:
///   double value(const Point&)
///   double value_and_gradient(const Point&, Ambient& gradient)
/// where `gradient` receives the Euclidean gradient in the ambient space.
template <class F, class Manifold>
concept ManifoldObjective = requires(F f, const typename Manifold::Point& x,
                                     typename Manifold::Ambient& g) {
  { f.value(x) } -> std::convertible_to<double>;
  { f.value_and_gradient(x, g) } -> std::convertible_to<double>;
};

/// Geometric nonlinear conjugate gradient with Armijo backtracking.
///
/// Iterates X⁺ = Γ(X, H, t) with H⁰ = −G⁰ and H⁺ = −G⁺ + β Ψ(H), β from
/// cg_beta_hybrid. The search direction restarts to steepest descent every
/// restart_period() iterations, whenever β's denominator vanishes, and whenever
/// H stops being a descent direction. The trial step starts at the last
/// accepted step and doubles after two consecutive first-try acceptances.
///
/// `observer(point, value, iteration)` is invoked on every iterate, including
/// the start point.
template <class Manifold, class F, class Observer = NoObserver>
  requires ManifoldObjective<F, Manifold>
SolveReport<typename Manifold::Point> minimize_cg(const Manifold& m, F& objective,
                                                  typename Manifold::Point start,
                                                  const SolverConfig& config,
                                                  Observer&& observer = {}) {
  using Tangent = typename Manifold::Tangent;
  config.validate();
  constexpr double kMinStep = 1e-16;
  constexpr double kEps = std::numeric_limits<double>::epsilon();

  SolveReport<typename Manifold::Point> report;
  report.point = std::move(start);
  auto& x = report.point;

  typename Manifold::Ambient ambient;
  double f = objective.value_and_gradient(x, ambient);
  report.evaluations = 1;
  if (!std::isfinite(f)) throw NonFiniteObjective("objective is not finite at the start point");
  Tangent grad = m.project(x, ambient);
  double grad_norm = std::sqrt(m.inner(grad, grad));
  if (!std::isfinite(grad_norm)) throw NonFiniteGradient("gradient is not finite at the start point");
  Tangent dir = m.combine(-1.0, grad, 0.0, grad);
  bool steepest = true;

  double step = config.initial_step;
  int first_try_streak = 0;
  long since_restart = 0;
  const long period = std::max<long>(1, static_cast<long>(m.restart_period(x)));

  for (;;) {
    observer(std::as_const(x), f, report.iterations);
    if (grad_norm < config.gradient_norm_tolerance) {
      report.status = SolveStatus::converged;
      break;
    }
    if (report.iterations >= config.max_iterations) {
      report.status = SolveStatus::max_iterations;
      break;
    }

    double slope = m.inner(grad, dir);
    if (!(slope < 0.0)) {
      dir = m.combine(-1.0, grad, 0.0, grad);
      slope = -grad_norm * grad_norm;
      steepest = true;
      since_restart = 0;
      ++report.restarts;
    }

    // Armijo backtracking along the geodesic.
    double trial = step;
    int tries = 0;
    typename Manifold::Point candidate;
    double f_candidate = 0.0;
    bool accepted = false;
    bool stalled = false;
    for (;;) {
      candidate = m.geodesic(x, dir, trial);
      f_candidate = objective.value(candidate);
      ++report.evaluations;
      ++tries;
      if (std::isfinite(f_candidate) && f_candidate <= f + config.armijo_slope * trial * slope) {
        accepted = true;
        break;
      }
      trial *= config.armijo_shrink;
      if (trial < kMinStep) {
        if (!steepest) break;
        // The first-order model predicts less decrease than f can resolve.
        if (config.armijo_slope * kMinStep * std::abs(slope) <= 16.0 * kEps * (1.0 + std::abs(f))) {
          stalled = true;
          break;
        }
        throw LineSearchFailure("backtracking step fell below 1e-16 at iteration " +
                                std::to_string(report.iterations));
      }
    }
    if (stalled) {
      report.status = SolveStatus::stalled;
      break;
    }
    if (!accepted) {
      // Conjugate direction failed; retry the same iterate with steepest descent.
      dir = m.combine(-1.0, grad, 0.0, grad);
      steepest = true;
      since_restart = 0;
      ++report.restarts;
      continue;
    }

    if (tries == 1) {
      if (++first_try_streak >= 2) {
        step = 2.0 * trial;
        first_try_streak = 0;
      } else {
        step = trial;
      }
    } else {
      first_try_streak = 0;
      step = trial;
    }

    double f_new = objective.value_and_gradient(candidate, ambient);
    ++report.evaluations;
    if (!std::isfinite(f_new)) throw NonFiniteObjective("objective became non-finite");
    Tangent grad_new = m.project(candidate, ambient);
    const double grad_new_norm = std::sqrt(m.inner(grad_new, grad_new));
    if (!std::isfinite(grad_new_norm)) throw NonFiniteGradient("gradient became non-finite");

    Tangent grad_moved = m.transport(x, dir, trial, grad);
    Tangent dir_moved = m.transport(x, dir, trial, dir);

    double beta = 0.0;
    ++since_restart;
    if (since_restart < period) {
      try {
        beta = cg_beta_hybrid(m, grad_new, grad_moved, dir_moved);
      } catch (const ZeroDenominator&) {
        beta = 0.0;
      }
    }
    if (beta == 0.0) {
      since_restart = 0;
      ++report.restarts;
    }
    dir = m.combine(-1.0, grad_new, beta, dir_moved);
    steepest = beta == 0.0;

    x = std::move(candidate);
    f = f_new;
    grad = std::move(grad_new);
    grad_norm = grad_new_norm;
    ++report.iterations;
  }

  report.value = f;
  report.gradient_norm = grad_norm;
  return report;
}

}  // namespace cosparse
