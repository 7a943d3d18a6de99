#include "cosparse/cg_solver.hpp"

namespace cosparse {

void SolverConfig::validate() const {
  if (max_iterations < 0) throw InvalidArgument("max_iterations must be non-negative");
  if (!(gradient_norm_tolerance > 0.0)) throw InvalidArgument("gradient_norm_tolerance must be positive");
  if (!(armijo_shrink > 0.0 && armijo_shrink < 1.0)) throw InvalidArgument("armijo_shrink must lie in (0,1)");
  if (!(armijo_slope > 0.0 && armijo_slope < 1.0)) throw InvalidArgument("armijo_slope must lie in (0,1)");
  if (!(initial_step > 0.0) || !std::isfinite(initial_step)) throw InvalidArgument("initial_step must be positive");
}

double cg_beta_hybrid(const TangentVector& grad_new, const TangentVector& grad_old_transported,
                      const TangentVector& dir_old_transported) {
  return cg_beta_hybrid(ConstraintManifold{}, grad_new, grad_old_transported, dir_old_transported);
}

}  // namespace cosparse
