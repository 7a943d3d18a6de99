#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "cosparse/bimodal_model.hpp"
#include "cosparse/cg_solver.hpp"
#include "cosparse/global_operator.hpp"
#include "cosparse/image.hpp"

namespace cosparse {

/// Linear sampling operator Φ mapping a width×height image to measurements.
class MeasurementOperator {
 public:
  enum class Kind { identity, mask, blur_downsample };

  static MeasurementOperator identity(int width, int height);
  /// Keeps the listed pixel indices (unique, in range) in the given order.
  static MeasurementOperator mask(int width, int height, std::vector<std::size_t> kept);
  /// Gaussian blur ((2d−1)², σ = d/3, reflective borders) followed by keeping
  /// every d-th pixel in both axes starting at offset ⌊(d−1)/2⌋.
  static MeasurementOperator blur_downsample(int width, int height, int factor);

  Kind kind() const noexcept { return kind_; }
  int input_width() const noexcept { return in_w_; }
  int input_height() const noexcept { return in_h_; }
  /// For masks the output is a 1-row image holding the kept samples.
  int output_width() const noexcept { return out_w_; }
  int output_height() const noexcept { return out_h_; }
  std::size_t input_size() const noexcept { return static_cast<std::size_t>(in_w_) * in_h_; }
  std::size_t output_size() const noexcept { return static_cast<std::size_t>(out_w_) * out_h_; }
  int factor() const noexcept { return factor_; }
  int sample_offset() const noexcept { return offset_; }
  int kernel_side() const noexcept { return kernel_side_; }
  const std::vector<double>& kernel() const noexcept { return kernel_; }
  const std::vector<std::size_t>& kept() const noexcept { return kept_; }

  Eigen::VectorXd apply(std::span<const double> image) const;
  Eigen::VectorXd apply_adjoint(std::span<const double> measurements) const;

 private:
  MeasurementOperator() = default;

  Kind kind_ = Kind::identity;
  int in_w_ = 0, in_h_ = 0, out_w_ = 0, out_h_ = 0;
  int factor_ = 1, offset_ = 0, kernel_side_ = 1;
  std::vector<double> kernel_;
  std::vector<std::size_t> kept_;
};

/// Pixel-replication upsampling of a blur_downsample measurement, the baseline
/// the reconstruction is compared against.
ModalImage upsample_nearest(const Eigen::VectorXd& measurements, const MeasurementOperator& phi);

/// Default continuation schedule, ending at λ = 1.
std::vector<double> default_lambda_schedule();

/// Throws InvalidArgument unless the schedule is positive, strictly decreasing and ends at 1.
void validate_lambda_schedule(std::span<const double> schedule);

struct ReconstructionProblem {
  OperatorPair pair;
  ModalImage guide;  // fixed high-quality image of modality U
  Eigen::VectorXd measurements;
  MeasurementOperator phi = MeasurementOperator::identity(1, 1);
  std::vector<double> lambda_schedule = default_lambda_schedule();
  double noise_bound = 0.0;   // recorded only; the Lagrangian form is solved
  std::optional<double> nu;   // coupling weight; the pair's learning ν when unset

  double coupling_weight() const { return nu.value_or(pair.params.nu); }
  void validate() const;
};

struct RandomInit {
  std::uint64_t seed = 0;
};
/// Either an explicit starting image or i.i.d. uniform [0,1] values.
using InitialGuess = std::variant<Eigen::VectorXd, RandomInit>;

struct StageReport {
  double lambda = 0.0;
  double initial_value = 0.0;
  double final_value = 0.0;
  double coupling = 0.0;  // g at the stage's solution
  int iterations = 0;
  SolveStatus status = SolveStatus::max_iterations;
};

/// Called with (stage index, iteration, objective value) on every accepted iterate.
using StageObserver = std::function<void(std::size_t, int, double)>;

struct GuidedResult {
  ModalImage image;
  std::vector<StageReport> stages;
};

/// c = Ω_U^F · guide, the fixed analyzed guide.
Eigen::VectorXd precompute_guide_coeffs(const OperatorPair& pair, const ModalImage& guide);

/// Objective λ·g(c, Ω_V^F s) + ‖Φ s − y‖² with its gradient.
class GuidedObjective {
 public:
  GuidedObjective(const GlobalAnalysis& analysis, const Eigen::VectorXd& guide_coeffs,
                  const MeasurementOperator& phi, const Eigen::VectorXd& measurements, double nu,
                  double lambda);

  double value(const Eigen::VectorXd& s) const;
  double value_and_gradient(const Eigen::VectorXd& s, Eigen::VectorXd& gradient) const;
  double coupling(const Eigen::VectorXd& s) const;
  void set_lambda(double lambda) noexcept { lambda_ = lambda; }

 private:
  const GlobalAnalysis& analysis_;
  const Eigen::VectorXd& c_;
  const MeasurementOperator& phi_;
  const Eigen::VectorXd& y_;
  double nu_;
  double lambda_;
};

/// Guided single-modality reconstruction with λ-continuation. Each stage runs
/// nonlinear CG (hybrid β, Armijo) warm-started from the previous stage.
GuidedResult reconstruct_guided(const ReconstructionProblem& problem, const InitialGuess& init,
                                const SolverConfig& solver, const StageObserver& observer = {});

struct JointOptions {
  /// Keep s_U fixed at its initial value (only s_V is optimized).
  bool clamp_u = false;
  std::optional<double> nu;
  InitialGuess init_u = RandomInit{0};
  InitialGuess init_v = RandomInit{1};
};

struct JointResult {
  ModalImage image_u;
  ModalImage image_v;
  std::vector<StageReport> stages;
};

/// Joint recovery of both modalities minimizing
/// λ·g(Ω_U^F s_U, Ω_V^F s_V) + ‖Φ_U s_U − y_U‖² + ‖Φ_V s_V − y_V‖².
JointResult reconstruct_joint(const OperatorPair& pair, const Eigen::VectorXd& y_u,
                              const Eigen::VectorXd& y_v, const MeasurementOperator& phi_u,
                              const MeasurementOperator& phi_v, std::span<const double> lambda_schedule,
                              const SolverConfig& solver, const JointOptions& options = {},
                              const StageObserver& observer = {});

/// Value and gradient of the joint objective over s = [s_U; s_V].
class JointObjective {
 public:
  JointObjective(const GlobalAnalysis& analysis_u, const GlobalAnalysis& analysis_v,
                 const MeasurementOperator& phi_u, const MeasurementOperator& phi_v,
                 const Eigen::VectorXd& y_u, const Eigen::VectorXd& y_v, double nu, double lambda,
                 bool clamp_u);

  double value(const Eigen::VectorXd& s) const;
  double value_and_gradient(const Eigen::VectorXd& s, Eigen::VectorXd& gradient) const;
  double coupling(const Eigen::VectorXd& s) const;
  void set_lambda(double lambda) noexcept { lambda_ = lambda; }

 private:
  const GlobalAnalysis& au_;
  const GlobalAnalysis& av_;
  const MeasurementOperator& phi_u_;
  const MeasurementOperator& phi_v_;
  const Eigen::VectorXd& y_u_;
  const Eigen::VectorXd& y_v_;
  double nu_;
  double lambda_;
  bool clamp_u_;
};

struct ReconstructionMetrics {
  double rmse = 0.0;
  double bad_pixel_pct = 0.0;
};

/// RMSE and percentage of pixels with |error| > δ, both after multiplying
/// values by `value_scale` (255 for images stored in [0,1]).
ReconstructionMetrics evaluate_metrics(const ModalImage& result, const ModalImage& ground_truth,
                                       double delta, double value_scale = 1.0);

}  // namespace cosparse
