#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cosparse/bimodal_model.hpp"
#include "cosparse/cg_solver.hpp"
#include "cosparse/global_operator.hpp"
#include "cosparse/image.hpp"
#include "cosparse/lie_group.hpp"

namespace cosparse {

/// Axis-aligned pixel rectangle [x0, x0+width) × [y0, y0+height).
struct Region {
  int x0 = 0;
  int y0 = 0;
  int width = 0;
  int height = 0;

  /// Pixel coordinate of the rectangle's center; transforms pivot here.
  Eigen::Vector2d center() const {
    return {x0 + 0.5 * (width - 1), y0 + 0.5 * (height - 1)};
  }
  double diagonal() const { return std::hypot(static_cast<double>(width), static_cast<double>(height)); }
  bool inside(int image_width, int image_height) const {
    return x0 >= 0 && y0 >= 0 && width > 0 && height > 0 && x0 + width <= image_width &&
           y0 + height <= image_height;
  }
  static Region whole(const ModalImage& image) { return {0, 0, image.width(), image.height()}; }
};

enum class Interpolation {
  bilinear,
  cubic,  // Keys cubic convolution (a = −½); continuously differentiable
};

/// Interpolated image value at real pixel coordinates (col, row).
struct PixelSample {
  double value = 0.0;
  double d_col = 0.0;  // exact derivative of the interpolant
  double d_row = 0.0;
  bool valid = false;  // false when (col,row) lies outside [0,w−1]×[0,h−1]
};
/// Outside the image the coordinates are clamped to the border. Taps beyond the
/// border replicate the edge pixels.
PixelSample sample_bilinear(const ModalImage& image, double col, double row);
PixelSample sample_cubic(const ModalImage& image, double col, double row);
PixelSample sample(const ModalImage& image, double col, double row, Interpolation mode);

struct WarpResult {
  ModalImage image;                 // region-sized
  std::vector<std::uint8_t> valid;  // 1 where τx fell inside the source image
};

/// (τ∘I)(x) = I(τx) over `region`, with x measured relative to `origin`.
/// Samples outside the source are clamped to the border and flagged invalid.
WarpResult warp(const ModalImage& image, const GroupElement& tau, const Region& region,
                const Eigen::Vector2d& origin, Interpolation mode = Interpolation::bilinear);
WarpResult warp(const ModalImage& image, const GroupElement& tau, const Region& region);

/// Central differences inside, one-sided at the borders; third component 0.
/// Needs at least a 3×3 image.
std::vector<Eigen::Vector3d> image_gradient(const ModalImage& image);

/// Level 0 is the input; each next level is a 5×5, σ=1 Gaussian blur (reflective)
/// followed by keeping even rows/columns. Throws TooSmall when the coarsest
/// level would be smaller than `min_side` in either direction.
std::vector<ModalImage> gaussian_pyramid(const ModalImage& image, int levels, int min_side = 1);

enum class ImageGradientMode {
  interpolant,  // derivative of the interpolant at τx
  central,      // interpolated central-difference gradient
};

/// F(τ) = mean over valid patch positions of g(Ω_U^F I_U, Ω_V^F (τ∘I_V)) on one
/// image scale. A patch position is valid when all of its warped pixels are.
class RegistrationObjective {
 public:
  RegistrationObjective(const ModalImage& fixed, const ModalImage& moving, const OperatorPair& pair,
                        const Region& region, const Eigen::Vector2d& origin, double nu,
                        GroupKind group, const MetricWeights& weights,
                        ImageGradientMode mode = ImageGradientMode::interpolant,
                        Interpolation interpolation = Interpolation::cubic);

  /// +∞ when no patch position is valid.
  double value(const GroupElement& tau) const;

  /// Euclidean gradient matrix vec⁻¹(r), so that d/dt F(e^{tH}τ)|₀ = Σ_ij R_ij H_ij.
  Eigen::Matrix3d euclidean_gradient(const GroupElement& tau, double* value = nullptr) const;

  /// Riemannian gradient Π_g(vec⁻¹(r) ⊙ P̂). Throws NonFiniteGradient.
  AlgebraElement gradient(const GroupElement& tau, double* value = nullptr) const;

  const Eigen::VectorXd& fixed_coefficients() const noexcept { return c_; }
  GroupKind group() const noexcept { return group_; }
  const MetricWeights& weights() const noexcept { return weights_; }
  const Region& region() const noexcept { return region_; }
  const Eigen::Vector2d& origin() const noexcept { return origin_; }
  Eigen::Index valid_positions(const GroupElement& tau) const;

 private:
  struct Analyzed {
    Eigen::VectorXd coeffs;
    std::vector<std::uint8_t> position_valid;
    Eigen::Index valid_count = 0;
  };
  Analyzed analyze(const WarpResult& warped) const;

  const ModalImage& moving_;
  Region region_;
  Eigen::Vector2d origin_;
  double nu_;
  GroupKind group_;
  MetricWeights weights_;
  ImageGradientMode mode_;
  Interpolation interpolation_;
  GlobalAnalysis analysis_v_;
  Eigen::VectorXd c_;
  std::vector<Eigen::Vector3d> moving_gradient_;
};

struct RegistrationProblem {
  ModalImage fixed;   // I_U
  ModalImage moving;  // I_V
  OperatorPair pair;
  GroupKind group = GroupKind::SE2;
  std::optional<MetricWeights> weights;  // MetricWeights::balanced(region diagonal) when unset
  Region region;                         // in level-0 pixels
  int pyramid_levels = 4;
  std::optional<double> nu;              // the pair's learning ν when unset
  ImageGradientMode gradient_mode = ImageGradientMode::interpolant;
  /// Bilinear sampling has kinks at integer positions, where its one-sided
  /// derivative need not give a descent direction; cubic is the default.
  Interpolation interpolation = Interpolation::cubic;
  /// Gaussian σ applied to both images on every pyramid level before matching.
  /// Interpolating at fractional positions low-passes the moving image, which
  /// biases F toward half-pixel offsets unless both inputs are band-limited.
  /// 0 disables it.
  double smoothing_sigma = 1.0;

  void validate() const;
};

struct RegistrationOptions {
  SolverConfig solver{100, 1e-6, 0.5, 0.1, 1.0};
  /// Largest pixel displacement of a single trial step within the region.
  double max_step_displacement = 2.0;
  std::optional<GroupElement> initial;  // identity when unset
};

struct LevelReport {
  int level = 0;
  int iterations = 0;
  double initial_value = 0.0;
  double final_value = 0.0;
  double gradient_norm = 0.0;
  SolveStatus status = SolveStatus::max_iterations;
};

struct RegistrationResult {
  GroupElement tau;
  std::vector<LevelReport> levels;  // coarsest first
};

/// Called with (level, iteration, F, τ) for every accepted iterate; τ is in the
/// pixel units of that level.
using RegistrationObserver = std::function<void(int, int, double, const GroupElement&)>;

/// Riemannian gradient of τ ↦ F(δ∘τ) at δ = id for the level-0 problem.
AlgebraElement registration_gradient(const RegistrationProblem& problem, const GroupElement& tau);

/// Coarse-to-fine Riemannian gradient descent τ ← e^{−tG}τ with Armijo steps,
/// starting at the identity on the coarsest level. The translation part of τ is
/// doubled when moving to the next finer level.
RegistrationResult register_images(const RegistrationProblem& problem,
                                   const RegistrationOptions& options = {},
                                   const RegistrationObserver& observer = {});

/// Residual of a recovered rigid transform against the applied deregistration.
struct RegistrationResidual {
  double ex = 0.0;        // pixels
  double ey = 0.0;        // pixels
  double etheta = 0.0;    // degrees
  double combined() const { return std::sqrt(ex * ex + ey * ey + etheta * etheta); }
};
RegistrationResidual registration_residual(const GroupElement& estimate, double tx, double ty,
                                           double theta_deg);

}  // namespace cosparse
