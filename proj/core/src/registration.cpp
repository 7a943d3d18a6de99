#include "cosparse/registration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cosparse/errors.hpp"

namespace cosparse {

namespace {

struct Cell {
  int c0, r0;
  double fx, fy;
  bool valid;
};

Cell locate(int width, int height, double col, double row) {
  Cell cell{};
  cell.valid = std::isfinite(col) && std::isfinite(row) && col >= 0.0 && row >= 0.0 &&
               col <= width - 1.0 && row <= height - 1.0;
  const double cc = std::clamp(std::isfinite(col) ? col : 0.0, 0.0, width - 1.0);
  const double rr = std::clamp(std::isfinite(row) ? row : 0.0, 0.0, height - 1.0);
  cell.c0 = std::min(static_cast<int>(std::floor(cc)), width - 2);
  cell.r0 = std::min(static_cast<int>(std::floor(rr)), height - 2);
  cell.fx = cc - cell.c0;
  cell.fy = rr - cell.r0;
  return cell;
}

// Keys kernel weights for the four taps at offsets −1..2 from the cell origin,
// and their derivatives with respect to the fractional position f.
void keys_weights(double f, double w[4], double dw[4]) {
  const double f2 = f * f, f3 = f2 * f;
  w[0] = -0.5 * f3 + f2 - 0.5 * f;
  w[1] = 1.5 * f3 - 2.5 * f2 + 1.0;
  w[2] = -1.5 * f3 + 2.0 * f2 + 0.5 * f;
  w[3] = 0.5 * f3 - 0.5 * f2;
  dw[0] = -1.5 * f2 + 2.0 * f - 0.5;
  dw[1] = 4.5 * f2 - 5.0 * f;
  dw[2] = -4.5 * f2 + 4.0 * f + 0.5;
  dw[3] = 1.5 * f2 - f;
}

template <class Pixel>
PixelSample interpolate(int width, int height, double col, double row, Interpolation mode,
                        const Pixel& pixel) {
  const Cell cell = locate(width, height, col, row);
  PixelSample s;
  s.valid = cell.valid;
  if (mode == Interpolation::bilinear) {
    const double i00 = pixel(cell.r0, cell.c0);
    const double i01 = pixel(cell.r0, cell.c0 + 1);
    const double i10 = pixel(cell.r0 + 1, cell.c0);
    const double i11 = pixel(cell.r0 + 1, cell.c0 + 1);
    s.value = (1.0 - cell.fy) * ((1.0 - cell.fx) * i00 + cell.fx * i01) +
              cell.fy * ((1.0 - cell.fx) * i10 + cell.fx * i11);
    s.d_col = (1.0 - cell.fy) * (i01 - i00) + cell.fy * (i11 - i10);
    s.d_row = (1.0 - cell.fx) * (i10 - i00) + cell.fx * (i11 - i01);
    return s;
  }
  double wx[4], dwx[4], wy[4], dwy[4];
  keys_weights(cell.fx, wx, dwx);
  keys_weights(cell.fy, wy, dwy);
  for (int i = 0; i < 4; ++i) {
    const int r = std::clamp(cell.r0 - 1 + i, 0, height - 1);
    double v = 0.0, dv = 0.0;
    for (int j = 0; j < 4; ++j) {
      const double p = pixel(r, std::clamp(cell.c0 - 1 + j, 0, width - 1));
      v += wx[j] * p;
      dv += dwx[j] * p;
    }
    s.value += wy[i] * v;
    s.d_col += wy[i] * dv;
    s.d_row += dwy[i] * v;
  }
  return s;
}

Eigen::Vector3d centered(const Region& region, const Eigen::Vector2d& origin, int row, int col) {
  return {region.x0 + col - origin.x(), region.y0 + row - origin.y(), 1.0};
}

}  // namespace

PixelSample sample(const ModalImage& image, double col, double row, Interpolation mode) {
  if (image.width() < 2 || image.height() < 2) throw TooSmall("interpolation needs a 2×2 image");
  return interpolate(image.width(), image.height(), col, row, mode,
                     [&](int r, int c) { return image(r, c); });
}

PixelSample sample_bilinear(const ModalImage& image, double col, double row) {
  return sample(image, col, row, Interpolation::bilinear);
}

PixelSample sample_cubic(const ModalImage& image, double col, double row) {
  return sample(image, col, row, Interpolation::cubic);
}

WarpResult warp(const ModalImage& image, const GroupElement& tau, const Region& region,
                const Eigen::Vector2d& origin, Interpolation mode) {
  if (region.width <= 0 || region.height <= 0) throw InvalidArgument("warp region is empty");
  WarpResult out{ModalImage(region.width, region.height, image.modality_tag()),
                 std::vector<std::uint8_t>(static_cast<std::size_t>(region.width) * region.height, 0)};
  const Eigen::Matrix3d& m = tau.matrix();
  for (int r = 0; r < region.height; ++r) {
    for (int c = 0; c < region.width; ++c) {
      const Eigen::Vector3d y = m * centered(region, origin, r, c);
      const PixelSample s = sample(image, y.x() + origin.x(), y.y() + origin.y(), mode);
      out.image(r, c) = s.value;
      out.valid[static_cast<std::size_t>(r) * region.width + c] = s.valid ? 1 : 0;
    }
  }
  return out;
}

WarpResult warp(const ModalImage& image, const GroupElement& tau, const Region& region) {
  return warp(image, tau, region, region.center());
}

std::vector<Eigen::Vector3d> image_gradient(const ModalImage& image) {
  const int w = image.width();
  const int h = image.height();
  if (w < 3 || h < 3) throw TooSmall("image gradient needs a 3×3 image");
  std::vector<Eigen::Vector3d> grad(image.size());
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double gx;
      if (c == 0) gx = image(r, 1) - image(r, 0);
      else if (c == w - 1) gx = image(r, w - 1) - image(r, w - 2);
      else gx = 0.5 * (image(r, c + 1) - image(r, c - 1));
      double gy;
      if (r == 0) gy = image(1, c) - image(0, c);
      else if (r == h - 1) gy = image(h - 1, c) - image(h - 2, c);
      else gy = 0.5 * (image(r + 1, c) - image(r - 1, c));
      grad[static_cast<std::size_t>(r) * w + c] = {gx, gy, 0.0};
    }
  }
  return grad;
}

std::vector<ModalImage> gaussian_pyramid(const ModalImage& image, int levels, int min_side) {
  if (levels < 1) throw InvalidArgument("pyramid needs at least one level");
  if (image.empty()) throw TooSmall("pyramid input is empty");
  static const std::vector<double> kernel = gaussian_kernel(5, 1.0);
  std::vector<ModalImage> pyramid;
  pyramid.reserve(static_cast<std::size_t>(levels));
  pyramid.push_back(image);
  for (int l = 1; l < levels; ++l) {
    const ModalImage blurred = filter_reflective(pyramid.back(), kernel, 5);
    const int w = (blurred.width() + 1) / 2;
    const int h = (blurred.height() + 1) / 2;
    ModalImage next(w, h, image.modality_tag());
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) next(r, c) = blurred(2 * r, 2 * c);
    }
    pyramid.push_back(std::move(next));
  }
  if (pyramid.back().width() < min_side || pyramid.back().height() < min_side) {
    throw TooSmall("coarsest pyramid level is smaller than the minimum side");
  }
  return pyramid;
}

RegistrationObjective::RegistrationObjective(const ModalImage& fixed, const ModalImage& moving,
                                             const OperatorPair& pair, const Region& region,
                                             const Eigen::Vector2d& origin, double nu, GroupKind group,
                                             const MetricWeights& weights, ImageGradientMode mode,
                                             Interpolation interpolation)
    : moving_(moving),
      region_(region),
      origin_(origin),
      nu_(nu),
      group_(group),
      weights_(weights),
      mode_(mode),
      interpolation_(interpolation),
      analysis_v_(pair.omega_v, region.width, region.height, PatchBoundary::valid) {
  pair.validate();
  weights_.validate();
  if (!(nu > 0.0) || !std::isfinite(nu)) throw InvalidArgument("coupling weight ν must be positive");
  if (!region.inside(fixed.width(), fixed.height())) {
    throw InvalidArgument("registration region must lie inside the fixed image");
  }
  if (moving.width() < 3 || moving.height() < 3) throw TooSmall("moving image is too small");
  const GlobalAnalysis analysis_u(pair.omega_u, region.width, region.height, PatchBoundary::valid);
  c_ = analysis_u.apply(fixed.crop(region.x0, region.y0, region.width, region.height));
  if (mode_ == ImageGradientMode::central) moving_gradient_ = image_gradient(moving);
}

RegistrationObjective::Analyzed RegistrationObjective::analyze(const WarpResult& warped) const {
  const int w = region_.width;
  const int h = region_.height;
  // Prefix sums of invalid pixels decide patch validity in O(1) per position.
  std::vector<int> invalid(static_cast<std::size_t>(w + 1) * (h + 1), 0);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      invalid[static_cast<std::size_t>(r + 1) * (w + 1) + c + 1] =
          (warped.valid[static_cast<std::size_t>(r) * w + c] ? 0 : 1) +
          invalid[static_cast<std::size_t>(r) * (w + 1) + c + 1] +
          invalid[static_cast<std::size_t>(r + 1) * (w + 1) + c] -
          invalid[static_cast<std::size_t>(r) * (w + 1) + c];
    }
  }
  auto at = [&](int r, int c) { return invalid[static_cast<std::size_t>(r) * (w + 1) + c]; };
  const int side = analysis_v_.patch_operator().patch_side();
  Analyzed a;
  a.coeffs = analysis_v_.apply(warped.image);
  a.position_valid.assign(static_cast<std::size_t>(analysis_v_.position_count()), 0);
  for (int pr = 0; pr < analysis_v_.positions_y(); ++pr) {
    const int r0 = analysis_v_.patch_origin_row(pr);
    for (int pc = 0; pc < analysis_v_.positions_x(); ++pc) {
      const int c0 = analysis_v_.patch_origin_col(pc);
      const int bad = at(r0 + side, c0 + side) - at(r0, c0 + side) - at(r0 + side, c0) + at(r0, c0);
      if (bad == 0) {
        a.position_valid[static_cast<std::size_t>(pr) * analysis_v_.positions_x() + pc] = 1;
        ++a.valid_count;
      }
    }
  }
  return a;
}

double RegistrationObjective::value(const GroupElement& tau) const {
  const Analyzed a = analyze(warp(moving_, tau, region_, origin_, interpolation_));
  if (a.valid_count == 0) return std::numeric_limits<double>::infinity();
  const Eigen::Index k = analysis_v_.patch_operator().row_count();
  double total = 0.0;
  for (std::size_t p = 0; p < a.position_valid.size(); ++p) {
    if (!a.position_valid[p]) continue;
    const auto off = static_cast<Eigen::Index>(p) * k;
    for (Eigen::Index j = 0; j < k; ++j) {
      total += std::log1p(nu_ * (c_[off + j] * c_[off + j] + a.coeffs[off + j] * a.coeffs[off + j]));
    }
  }
  return total / static_cast<double>(a.valid_count);
}

Eigen::Index RegistrationObjective::valid_positions(const GroupElement& tau) const {
  return analyze(warp(moving_, tau, region_, origin_, interpolation_)).valid_count;
}

Eigen::Matrix3d RegistrationObjective::euclidean_gradient(const GroupElement& tau, double* value) const {
  const int w = region_.width;
  const int h = region_.height;
  const Eigen::Matrix3d& m = tau.matrix();
  WarpResult warped{ModalImage(w, h), std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h, 0)};
  std::vector<Eigen::Vector3d> mapped(static_cast<std::size_t>(w) * h);
  std::vector<Eigen::Vector2d> slope(static_cast<std::size_t>(w) * h);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * w + c;
      mapped[i] = m * centered(region_, origin_, r, c);
      const double col = mapped[i].x() + origin_.x();
      const double row = mapped[i].y() + origin_.y();
      const PixelSample s = sample(moving_, col, row, interpolation_);
      warped.image(r, c) = s.value;
      warped.valid[i] = s.valid ? 1 : 0;
      if (mode_ == ImageGradientMode::interpolant) {
        slope[i] = {s.d_col, s.d_row};
      } else {
        const int w_m = moving_.width();
        auto component = [&](int k) {
          return interpolate(w_m, moving_.height(), col, row, interpolation_, [&](int rr, int cc) {
                   return moving_gradient_[static_cast<std::size_t>(rr) * w_m + cc][k];
                 }).value;
        };
        slope[i] = {component(0), component(1)};
      }
    }
  }
  const Analyzed a = analyze(warped);
  if (a.valid_count == 0) {
    throw NonFiniteObjective("no patch position overlaps the warped image");
  }
  const Eigen::Index k = analysis_v_.patch_operator().row_count();
  const double scale = 1.0 / static_cast<double>(a.valid_count);
  Eigen::VectorXd dg = Eigen::VectorXd::Zero(a.coeffs.size());
  double total = 0.0;
  for (std::size_t p = 0; p < a.position_valid.size(); ++p) {
    if (!a.position_valid[p]) continue;
    const auto off = static_cast<Eigen::Index>(p) * k;
    for (Eigen::Index j = 0; j < k; ++j) {
      const double cj = c_[off + j];
      const double bj = a.coeffs[off + j];
      const double q = 1.0 + nu_ * (cj * cj + bj * bj);
      total += std::log1p(nu_ * (cj * cj + bj * bj));
      dg[off + j] = scale * 2.0 * nu_ * bj / q;
    }
  }
  if (value) *value = total * scale;
  const Eigen::VectorXd pixel_weight =
      analysis_v_.apply_adjoint(std::span<const double>(dg.data(), static_cast<std::size_t>(dg.size())));
  Eigen::Matrix3d grad = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < mapped.size(); ++i) {
    const double wi = pixel_weight[static_cast<Eigen::Index>(i)];
    if (wi == 0.0) continue;
    grad.row(0) += (wi * slope[i].x()) * mapped[i].transpose();
    grad.row(1) += (wi * slope[i].y()) * mapped[i].transpose();
  }
  return grad;
}

AlgebraElement RegistrationObjective::gradient(const GroupElement& tau, double* value) const {
  const Eigen::Matrix3d r = euclidean_gradient(tau, value);
  const Eigen::Matrix3d g = project_algebra(group_, r.cwiseProduct(weights_.reciprocal()));
  if (!g.allFinite()) throw NonFiniteGradient("registration gradient is not finite");
  return AlgebraElement(g, group_);
}

void RegistrationProblem::validate() const {
  pair.validate();
  fixed.check_finite();
  moving.check_finite();
  if (pyramid_levels < 1) throw InvalidArgument("pyramid needs at least one level");
  if (!region.inside(fixed.width(), fixed.height())) {
    throw InvalidArgument("registration region must lie inside the fixed image");
  }
  if (weights) weights->validate();
  if (nu && (!(*nu > 0.0) || !std::isfinite(*nu))) {
    throw InvalidArgument("coupling weight ν must be positive");
  }
  if (!(smoothing_sigma >= 0.0) || !std::isfinite(smoothing_sigma)) {
    throw InvalidArgument("smoothing σ must be non-negative");
  }
  const int side = pair.omega_u.patch_side();
  if (region.width < side || region.height < side) throw TooSmall("region is smaller than one patch");
}

AlgebraElement registration_gradient(const RegistrationProblem& problem, const GroupElement& tau) {
  problem.validate();
  const RegistrationObjective objective(
      problem.fixed, problem.moving, problem.pair, problem.region, problem.region.center(),
      problem.nu.value_or(problem.pair.params.nu), problem.group,
      problem.weights.value_or(MetricWeights::balanced(problem.region.diagonal())),
      problem.gradient_mode, problem.interpolation);
  return objective.gradient(tau);
}

namespace {

Region scale_region(const Region& region, int factor) {
  const int x0 = (region.x0 + factor - 1) / factor;
  const int y0 = (region.y0 + factor - 1) / factor;
  const int x1 = (region.x0 + region.width - 1) / factor;
  const int y1 = (region.y0 + region.height - 1) / factor;
  return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

GroupElement scale_translation(const GroupElement& tau, double factor) {
  Eigen::Matrix3d m = tau.matrix();
  m.block<2, 1>(0, 2) *= factor;
  return {m, tau.group()};
}

// Largest first-order pixel displacement of the region corners under the step −G.
double step_displacement(const Eigen::Matrix3d& g, const GroupElement& tau, const Region& region,
                         const Eigen::Vector2d& origin) {
  double worst = 0.0;
  for (int r : {0, region.height - 1}) {
    for (int c : {0, region.width - 1}) {
      const Eigen::Vector3d y = tau.matrix() * centered(region, origin, r, c);
      worst = std::max(worst, (g * y).head<2>().norm());
    }
  }
  return worst;
}

}  // namespace

RegistrationResult register_images(const RegistrationProblem& problem, const RegistrationOptions& options,
                                   const RegistrationObserver& observer) {
  problem.validate();
  options.solver.validate();
  if (!(options.max_step_displacement > 0.0)) {
    throw InvalidArgument("maximum step displacement must be positive");
  }
  const int levels = problem.pyramid_levels;
  const int side = problem.pair.omega_u.patch_side();
  std::vector<ModalImage> fixed = gaussian_pyramid(problem.fixed, levels);
  std::vector<ModalImage> moving = gaussian_pyramid(problem.moving, levels);
  if (problem.smoothing_sigma > 0.0) {
    const int kside = 2 * static_cast<int>(std::ceil(2.0 * problem.smoothing_sigma)) + 1;
    const std::vector<double> kernel = gaussian_kernel(kside, problem.smoothing_sigma);
    for (auto* pyramid : {&fixed, &moving}) {
      for (ModalImage& level : *pyramid) level = filter_reflective(level, kernel, kside);
    }
  }
  const double nu = problem.nu.value_or(problem.pair.params.nu);
  const Eigen::Vector2d origin0 = problem.region.center();

  GroupElement tau = options.initial.value_or(GroupElement::identity(problem.group));
  if (tau.group() != problem.group) {
    const Eigen::Matrix3d m = tau.matrix();
    if (!in_group(m, problem.group)) throw InvalidArgument("initial transform is not in the group");
    tau = GroupElement(m, problem.group);
  }
  tau = scale_translation(tau, 1.0 / std::ldexp(1.0, levels - 1));

  RegistrationResult result;
  for (int level = levels - 1; level >= 0; --level) {
    const int factor = 1 << level;
    const Region region = scale_region(problem.region, factor);
    if (region.width < side || region.height < side) {
      throw TooSmall("registration region is smaller than one patch at a coarse level");
    }
    const Eigen::Vector2d origin = origin0 / factor;
    const MetricWeights weights = problem.weights.value_or(MetricWeights::balanced(region.diagonal()));
    const RegistrationObjective objective(fixed[static_cast<std::size_t>(level)],
                                          moving[static_cast<std::size_t>(level)], problem.pair, region,
                                          origin, nu, problem.group, weights, problem.gradient_mode,
                                          problem.interpolation);
    const double tolerance = options.solver.gradient_norm_tolerance * factor;

    LevelReport report;
    report.level = level;
    double value = 0.0;
    Eigen::Matrix3d r = objective.euclidean_gradient(tau, &value);
    report.initial_value = value;
    double step = options.solver.initial_step;
    int first_try_streak = 0;
    for (int it = 0;; ++it) {
      const Eigen::Matrix3d g = project_algebra(problem.group, r.cwiseProduct(weights.reciprocal()));
      if (!g.allFinite()) throw NonFiniteGradient("registration gradient is not finite");
      const double gnorm = std::sqrt(std::max(0.0, metric_inner(g, g, weights)));
      report.gradient_norm = gnorm;
      report.iterations = it;
      if (gnorm < tolerance) {
        report.status = SolveStatus::converged;
        break;
      }
      if (it >= options.solver.max_iterations) {
        report.status = SolveStatus::max_iterations;
        break;
      }
      const double slope = (r.array() * g.array()).sum();
      const double cap = options.max_step_displacement / std::max(step_displacement(g, tau, region, origin), 1e-300);
      double t = std::min(step, cap);
      bool accepted = false;
      bool first_try = true;
      GroupElement candidate;
      double candidate_value = 0.0;
      while (t >= 1e-16) {
        candidate = exp_map(AlgebraElement(-t * g, problem.group)) * tau;
        candidate = GroupElement(candidate.matrix(), problem.group);
        candidate_value = objective.value(candidate);
        if (std::isfinite(candidate_value) &&
            candidate_value <= value - options.solver.armijo_slope * t * slope) {
          accepted = true;
          break;
        }
        t *= options.solver.armijo_shrink;
        first_try = false;
      }
      if (!accepted) {
        const double roundoff = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(value));
        if (1e-16 * slope <= roundoff) {
          report.status = SolveStatus::stalled;
          break;
        }
        throw LineSearchFailure("registration line search found no decrease");
      }
      tau = candidate;
      step = t;
      first_try_streak = first_try ? first_try_streak + 1 : 0;
      if (first_try_streak >= 2) {
        step *= 2.0;
        first_try_streak = 0;
      }
      r = objective.euclidean_gradient(tau, &value);
      if (observer) observer(level, it + 1, value, tau);
    }
    report.final_value = value;
    result.levels.push_back(report);
    if (level > 0) tau = scale_translation(tau, 2.0);
  }
  result.tau = tau;
  return result;
}

RegistrationResidual registration_residual(const GroupElement& estimate, double tx, double ty,
                                           double theta_deg) {
  const RigidParameters p = rigid_parameters(estimate);
  double dtheta = std::remainder(p.theta_deg - theta_deg, 360.0);
  return {p.tx - tx, p.ty - ty, dtheta};
}

}  // namespace cosparse
