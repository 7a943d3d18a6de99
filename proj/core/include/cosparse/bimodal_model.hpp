#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cosparse/cg_solver.hpp"
#include "cosparse/image.hpp"
#include "cosparse/manifold.hpp"

namespace cosparse {

/// k×n analysis operator whose rows are unit-norm and zero-mean.
class AnalysisOperator {
 public:
  AnalysisOperator() = default;

  /// Validates row constraints (1e-10), square patch size and k ≥ n−1.
  AnalysisOperator(Eigen::MatrixXd rows, std::string modality_tag);

  const Eigen::MatrixXd& rows() const noexcept { return rows_; }
  Eigen::Index row_count() const noexcept { return rows_.rows(); }
  Eigen::Index patch_size() const noexcept { return rows_.cols(); }
  int patch_side() const noexcept { return patch_side_; }
  const std::string& modality_tag() const noexcept { return tag_; }

 private:
  Eigen::MatrixXd rows_;
  int patch_side_ = 0;
  std::string tag_;
};

/// Weights of the learning function: ν for the coupling, κ·h + μ·r per modality.
struct LearningParams {
  double nu = 400.0;
  double kappa_u = 5.0;
  double kappa_v = 22.0;
  double mu_u = 1e2;
  double mu_v = 2.5e4;

  void validate() const;

  /// Intensity/depth weights used for the depth super-resolution operators.
  static LearningParams intensity_depth() { return {400.0, 5.0, 22.0, 1e2, 2.5e4}; }
  /// Intensity/near-infrared weights.
  static LearningParams intensity_nir() { return {200.0, 250.0, 1000.0, 250.0, 1000.0}; }
  /// Lighter regularization for 3×3 patches with k = 16, where the presets
  /// above leave the coupling term negligible next to the coherence barrier.
  static LearningParams small_patch() { return {400.0, 0.5, 0.5, 0.5, 0.5}; }

  friend bool operator==(const LearningParams&, const LearningParams&) = default;
};

struct OperatorPair {
  AnalysisOperator omega_u;
  AnalysisOperator omega_v;
  LearningParams params;

  /// Throws DimensionMismatch unless both operators share k and n.
  void validate() const;
};

/// M aligned training patch pairs stored column-wise (n×M), each patch already
/// divided by its own standard deviation.
struct PatchDataset {
  Eigen::MatrixXd u;
  Eigen::MatrixXd v;
  std::vector<double> std_u;  // per-patch deviation that was divided out
  std::vector<double> std_v;

  Eigen::Index patch_size() const noexcept { return u.rows(); }
  Eigen::Index size() const noexcept { return u.cols(); }
};

/// Σ_j log(1 + ν x_j²).
double sparsity_measure(std::span<const double> x, double nu);

/// Σ_j log(1 + ν (a_j² + b_j²)).
double coupled_sparsity(std::span<const double> a, std::span<const double> b, double nu);

/// ∂g/∂b_j = 2ν b_j / (1 + ν(a_j² + b_j²)), written into `out`.
void coupled_sparsity_gradient(std::span<const double> a, std::span<const double> b, double nu,
                               std::span<double> out);

/// Mean coupled sparsity of the analyzed training pairs.
double empirical_coupling(const OperatorPair& pair, const PatchDataset& data, double nu);
double empirical_coupling(const Eigen::MatrixXd& omega_u, const Eigen::MatrixXd& omega_v,
                          const PatchDataset& data, double nu);

/// Orthonormal basis of 1⊥ ⊂ R^n built from the n−1 non-constant DCT-II vectors (n×(n−1)).
Eigen::MatrixXd zero_mean_basis(Eigen::Index n);

/// h(Ω) = −log det((1/k) Wᵀ Ωᵀ Ω W) / ((n−1) log(n−1)). Needs n ≥ 3.
/// Throws RankDeficient when the determinant is ≤ 1e-300.
double rank_penalty(const AnalysisOperator& op);
double rank_penalty(const Eigen::MatrixXd& rows, Eigen::MatrixXd* gradient = nullptr);

/// r(Ω) = −Σ_{i<l} log(1 − (ω_iᵀω_l)²). Throws CoincidentRows when
/// |ω_iᵀω_l| ≥ 1 − 1e-12 for some pair.
double coherence_penalty(const AnalysisOperator& op);
double coherence_penalty(const Eigen::MatrixXd& rows, Eigen::MatrixXd* gradient = nullptr);

/// Full learning function L = G + κ_U h(Ω_U) + μ_U r(Ω_U) + κ_V h(Ω_V) + μ_V r(Ω_V)
/// evaluated on raw k×n operator matrices. When requested, the gradients with
/// respect to Ω_U and Ω_V are written to `grad_u`/`grad_v` (both k×n).
double learning_objective(const Eigen::MatrixXd& omega_u, const Eigen::MatrixXd& omega_v,
                          const PatchDataset& data, const LearningParams& params,
                          Eigen::MatrixXd* grad_u = nullptr, Eigen::MatrixXd* grad_v = nullptr);

double learning_objective(const OperatorPair& pair, const PatchDataset& data);

/// Samples `count` aligned patch pairs. Both images are first rescaled to
/// [0,1]; a position survives only if both patches have deviation ≥
/// `std_threshold`; survivors are shuffled with `seed` and the first `count`
/// are kept, each divided by its own deviation.
PatchDataset extract_training_patches(const ModalImage& image_u, const ModalImage& image_v,
                                      int patch_side, std::size_t count, std::uint64_t seed,
                                      double std_threshold = 0.05);

/// Same as above but pooling candidates from several registered image pairs.
PatchDataset extract_training_patches(std::span<const ModalImage> images_u,
                                      std::span<const ModalImage> images_v, int patch_side,
                                      std::size_t count, std::uint64_t seed,
                                      double std_threshold = 0.05);

/// Called with (Ω_U, Ω_V, L, iteration) on every accepted learning iterate.
using LearningObserver =
    std::function<void(const Eigen::MatrixXd&, const Eigen::MatrixXd&, double, int)>;

struct LearningResult {
  OperatorPair pair;
  double initial_value = 0.0;
  double final_value = 0.0;
  SolveReport<ManifoldPoint> report;
};

/// Learns (Ω_U, Ω_V) by geometric CG on the constraint manifold, starting from
/// seeded Gaussian rows projected onto the manifold.
LearningResult learn_pair(const PatchDataset& data, Eigen::Index k, const LearningParams& params,
                          const SolverConfig& solver, std::uint64_t seed,
                          std::string tag_u = "U", std::string tag_v = "V",
                          const LearningObserver& observer = {});

/// Random valid k×n operator (Gaussian rows projected onto the manifold).
Eigen::MatrixXd random_operator_rows(Eigen::Index k, Eigen::Index n, std::uint64_t seed);

}  // namespace cosparse
