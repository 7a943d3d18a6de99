#include "cosparse/bimodal_model.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "cosparse/errors.hpp"
#include "cosparse/random.hpp"

namespace cosparse {

namespace {

int integer_sqrt(Eigen::Index n) {
  int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  return static_cast<Eigen::Index>(side) * side == n ? side : 0;
}

struct PatchStats {
  double mean = 0.0;
  double deviation = 0.0;
};

PatchStats patch_stats(const ModalImage& img, int row, int col, int side) {
  double sum = 0.0;
  for (int i = 0; i < side; ++i)
    for (int j = 0; j < side; ++j) sum += img(row + i, col + j);
  const double n = static_cast<double>(side) * side;
  const double mean = sum / n;
  double sq = 0.0;
  for (int i = 0; i < side; ++i) {
    for (int j = 0; j < side; ++j) {
      const double d = img(row + i, col + j) - mean;
      sq += d * d;
    }
  }
  return {mean, std::sqrt(sq / n)};
}

}  // namespace

AnalysisOperator::AnalysisOperator(Eigen::MatrixXd rows, std::string modality_tag)
    : rows_(std::move(rows)), tag_(std::move(modality_tag)) {
  const Eigen::Index n = rows_.cols();
  patch_side_ = integer_sqrt(n);
  if (n < 2 || patch_side_ == 0) throw InvalidArgument("operator column count must be a square ≥ 4");
  if (rows_.rows() < n - 1) throw InvalidArgument("operator needs at least n-1 rows");
  const double violation = constraint_violation(rows_.transpose());
  if (!(violation <= 1e-10)) {
    throw InvalidArgument("operator rows must be unit-norm and zero-mean (violation " +
                          std::to_string(violation) + ")");
  }
}

void LearningParams::validate() const {
  for (double w : {nu, kappa_u, kappa_v, mu_u, mu_v}) {
    if (!(w > 0.0) || !std::isfinite(w)) throw InvalidArgument("learning weights must be positive");
  }
}

void OperatorPair::validate() const {
  if (omega_u.row_count() != omega_v.row_count() || omega_u.patch_size() != omega_v.patch_size()) {
    throw DimensionMismatch("operators of a pair must share k and n");
  }
}

double sparsity_measure(std::span<const double> x, double nu) {
  double s = 0.0;
  for (double v : x) s += std::log1p(nu * v * v);
  return s;
}

double coupled_sparsity(std::span<const double> a, std::span<const double> b, double nu) {
  if (a.size() != b.size()) throw DimensionMismatch("coupled vectors differ in length");
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += std::log1p(nu * (a[j] * a[j] + b[j] * b[j]));
  return s;
}

void coupled_sparsity_gradient(std::span<const double> a, std::span<const double> b, double nu,
                               std::span<double> out) {
  if (a.size() != b.size() || out.size() != b.size()) {
    throw DimensionMismatch("coupled vectors differ in length");
  }
  for (std::size_t j = 0; j < a.size(); ++j) {
    out[j] = 2.0 * nu * b[j] / (1.0 + nu * (a[j] * a[j] + b[j] * b[j]));
  }
}

double empirical_coupling(const Eigen::MatrixXd& omega_u, const Eigen::MatrixXd& omega_v,
                          const PatchDataset& data, double nu) {
  if (data.size() == 0) throw InvalidArgument("dataset is empty");
  if (omega_u.cols() != data.patch_size() || omega_v.cols() != data.patch_size() ||
      omega_u.rows() != omega_v.rows()) {
    throw DimensionMismatch("operator shape does not match the patch dimension");
  }
  const Eigen::ArrayXXd a = omega_u * data.u;
  const Eigen::ArrayXXd b = omega_v * data.v;
  return (nu * (a.square() + b.square())).log1p().sum() / static_cast<double>(data.size());
}

double empirical_coupling(const OperatorPair& pair, const PatchDataset& data, double nu) {
  return empirical_coupling(pair.omega_u.rows(), pair.omega_v.rows(), data, nu);
}

Eigen::MatrixXd zero_mean_basis(Eigen::Index n) {
  Eigen::MatrixXd w(n, n - 1);
  const double scale = std::sqrt(2.0 / static_cast<double>(n));
  for (Eigen::Index k = 1; k < n; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      w(i, k - 1) = scale * std::cos(std::numbers::pi * (static_cast<double>(i) + 0.5) *
                                     static_cast<double>(k) / static_cast<double>(n));
    }
  }
  return w;
}

double rank_penalty(const Eigen::MatrixXd& rows, Eigen::MatrixXd* gradient) {
  const Eigen::Index k = rows.rows();
  const Eigen::Index n = rows.cols();
  if (n < 3) throw InvalidArgument("rank penalty needs n >= 3");
  const Eigen::MatrixXd w = zero_mean_basis(n);
  const Eigen::MatrixXd rw = rows * w;
  const Eigen::MatrixXd gram = (rw.transpose() * rw) / static_cast<double>(k);
  const Eigen::LLT<Eigen::MatrixXd> llt(gram);
  constexpr double kLogFloor = -690.7755278982137;  // log(1e-300)
  if (llt.info() != Eigen::Success) throw RankDeficient("operator is rank deficient on 1⊥");
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  if (!(log_det > kLogFloor)) throw RankDeficient("operator Gram determinant below 1e-300");
  const double norm = static_cast<double>(n - 1) * std::log(static_cast<double>(n - 1));
  if (gradient) {
    const Eigen::MatrixXd gram_inv = llt.solve(Eigen::MatrixXd::Identity(n - 1, n - 1));
    *gradient = (-2.0 / (static_cast<double>(k) * norm)) * (rw * gram_inv * w.transpose());
  }
  return -log_det / norm;
}

double rank_penalty(const AnalysisOperator& op) { return rank_penalty(op.rows()); }

double coherence_penalty(const Eigen::MatrixXd& rows, Eigen::MatrixXd* gradient) {
  const Eigen::Index k = rows.rows();
  const Eigen::MatrixXd c = rows * rows.transpose();
  Eigen::MatrixXd weights;
  if (gradient) weights = Eigen::MatrixXd::Zero(k, k);
  double r = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index l = i + 1; l < k; ++l) {
      const double p = c(i, l);
      if (!(std::abs(p) < 1.0 - 1e-12)) {
        throw CoincidentRows("rows " + std::to_string(i) + " and " + std::to_string(l) +
                             " are (anti)parallel");
      }
      r -= std::log1p(-p * p);
      if (gradient) weights(i, l) = weights(l, i) = 2.0 * p / (1.0 - p * p);
    }
  }
  if (gradient) *gradient = weights * rows;
  return r;
}

double coherence_penalty(const AnalysisOperator& op) { return coherence_penalty(op.rows()); }

double learning_objective(const Eigen::MatrixXd& omega_u, const Eigen::MatrixXd& omega_v,
                          const PatchDataset& data, const LearningParams& params,
                          Eigen::MatrixXd* grad_u, Eigen::MatrixXd* grad_v) {
  if (data.size() == 0) throw InvalidArgument("dataset is empty");
  if (omega_u.cols() != data.patch_size() || omega_v.cols() != data.patch_size() ||
      omega_u.rows() != omega_v.rows()) {
    throw DimensionMismatch("operator shape does not match the patch dimension");
  }
  const double inv_m = 1.0 / static_cast<double>(data.size());
  const Eigen::ArrayXXd a = omega_u * data.u;
  const Eigen::ArrayXXd b = omega_v * data.v;
  const Eigen::ArrayXXd energy = params.nu * (a.square() + b.square());
  double value = energy.log1p().sum() * inv_m;

  const bool want_grad = grad_u != nullptr || grad_v != nullptr;
  Eigen::MatrixXd gh_u, gr_u, gh_v, gr_v;
  value += params.kappa_u * rank_penalty(omega_u, want_grad ? &gh_u : nullptr);
  value += params.mu_u * coherence_penalty(omega_u, want_grad ? &gr_u : nullptr);
  value += params.kappa_v * rank_penalty(omega_v, want_grad ? &gh_v : nullptr);
  value += params.mu_v * coherence_penalty(omega_v, want_grad ? &gr_v : nullptr);

  if (want_grad) {
    const Eigen::ArrayXXd weight = (2.0 * params.nu * inv_m) / (1.0 + energy);
    if (grad_u) {
      *grad_u = (weight * a).matrix() * data.u.transpose() + params.kappa_u * gh_u + params.mu_u * gr_u;
    }
    if (grad_v) {
      *grad_v = (weight * b).matrix() * data.v.transpose() + params.kappa_v * gh_v + params.mu_v * gr_v;
    }
  }
  return value;
}

double learning_objective(const OperatorPair& pair, const PatchDataset& data) {
  return learning_objective(pair.omega_u.rows(), pair.omega_v.rows(), data, pair.params);
}

PatchDataset extract_training_patches(std::span<const ModalImage> images_u,
                                      std::span<const ModalImage> images_v, int patch_side,
                                      std::size_t count, std::uint64_t seed, double std_threshold) {
  if (images_u.size() != images_v.size() || images_u.empty()) {
    throw InvalidArgument("need the same positive number of images per modality");
  }
  if (patch_side < 2) throw InvalidArgument("patch_side must be at least 2");
  if (count == 0) throw InvalidArgument("count must be positive");

  struct Candidate {
    std::size_t image;
    int row;
    int col;
  };
  std::vector<ModalImage> scaled_u, scaled_v;
  std::vector<Candidate> survivors;
  for (std::size_t idx = 0; idx < images_u.size(); ++idx) {
    if (!images_u[idx].same_shape(images_v[idx])) {
      throw DimensionMismatch("training images of a pair differ in size");
    }
    scaled_u.push_back(images_u[idx].rescaled_unit());
    scaled_v.push_back(images_v[idx].rescaled_unit());
    const auto& u = scaled_u.back();
    const auto& v = scaled_v.back();
    for (int r = 0; r + patch_side <= u.height(); ++r) {
      for (int c = 0; c + patch_side <= u.width(); ++c) {
        const double su = patch_stats(u, r, c, patch_side).deviation;
        const double sv = patch_stats(v, r, c, patch_side).deviation;
        if (su >= std_threshold && sv >= std_threshold && su > 0.0 && sv > 0.0) {
          survivors.push_back({idx, r, c});
        }
      }
    }
  }
  if (survivors.size() < count) {
    throw InsufficientSamples("only " + std::to_string(survivors.size()) +
                              " patch positions pass the deviation threshold, need " +
                              std::to_string(count));
  }
  std::mt19937_64 rng(seed);
  shuffle(survivors, rng);

  const Eigen::Index n = static_cast<Eigen::Index>(patch_side) * patch_side;
  PatchDataset data;
  data.u.resize(n, static_cast<Eigen::Index>(count));
  data.v.resize(n, static_cast<Eigen::Index>(count));
  data.std_u.reserve(count);
  data.std_v.reserve(count);
  for (std::size_t m = 0; m < count; ++m) {
    const auto& cand = survivors[m];
    const auto& u = scaled_u[cand.image];
    const auto& v = scaled_v[cand.image];
    const double su = patch_stats(u, cand.row, cand.col, patch_side).deviation;
    const double sv = patch_stats(v, cand.row, cand.col, patch_side).deviation;
    for (int i = 0; i < patch_side; ++i) {
      for (int j = 0; j < patch_side; ++j) {
        data.u(i * patch_side + j, static_cast<Eigen::Index>(m)) = u(cand.row + i, cand.col + j) / su;
        data.v(i * patch_side + j, static_cast<Eigen::Index>(m)) = v(cand.row + i, cand.col + j) / sv;
      }
    }
    data.std_u.push_back(su);
    data.std_v.push_back(sv);
  }
  return data;
}

PatchDataset extract_training_patches(const ModalImage& image_u, const ModalImage& image_v,
                                      int patch_side, std::size_t count, std::uint64_t seed,
                                      double std_threshold) {
  return extract_training_patches(std::span<const ModalImage>(&image_u, 1),
                                  std::span<const ModalImage>(&image_v, 1), patch_side, count, seed,
                                  std_threshold);
}

Eigen::MatrixXd random_operator_rows(Eigen::Index k, Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd raw(n, k);
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < n; ++i) raw(i, j) = standard_normal(rng);
  return project_to_manifold(raw).columns().transpose();
}

namespace {

// L as a function of X = [Ω_Uᵀ, Ω_Vᵀ] ∈ R^{n×2k}.
class LearningFunction {
 public:
  LearningFunction(const PatchDataset& data, const LearningParams& params, Eigen::Index k)
      : data_(data), params_(params), k_(k) {}

  double value(const ManifoldPoint& x) const {
    try {
      return learning_objective(x.columns().leftCols(k_).transpose(),
                                x.columns().rightCols(k_).transpose(), data_, params_);
    } catch (const RankDeficient&) {
      return std::numeric_limits<double>::infinity();
    } catch (const CoincidentRows&) {
      return std::numeric_limits<double>::infinity();
    }
  }

  double value_and_gradient(const ManifoldPoint& x, Eigen::MatrixXd& gradient) const {
    Eigen::MatrixXd gu, gv;
    const double f = learning_objective(x.columns().leftCols(k_).transpose(),
                                        x.columns().rightCols(k_).transpose(), data_, params_,
                                        &gu, &gv);
    gradient.resize(x.dimension(), 2 * k_);
    gradient.leftCols(k_) = gu.transpose();
    gradient.rightCols(k_) = gv.transpose();
    return f;
  }

 private:
  const PatchDataset& data_;
  const LearningParams& params_;
  Eigen::Index k_;
};

}  // namespace

LearningResult learn_pair(const PatchDataset& data, Eigen::Index k, const LearningParams& params,
                          const SolverConfig& solver, std::uint64_t seed, std::string tag_u,
                          std::string tag_v, const LearningObserver& observer) {
  params.validate();
  const Eigen::Index n = data.patch_size();
  if (data.size() == 0) throw InvalidArgument("dataset is empty");
  if (integer_sqrt(n) == 0 || n < 4) throw InvalidArgument("patch dimension must be a square ≥ 4");
  if (k < n - 1) throw InvalidArgument("k must be at least n-1");

  Eigen::MatrixXd raw(n, 2 * k);
  raw << random_operator_rows(k, n, seed).transpose(), random_operator_rows(k, n, seed + 1).transpose();
  ManifoldPoint start = project_to_manifold(raw);

  LearningFunction objective(data, params, k);
  LearningResult result;
  result.initial_value = objective.value(start);

  auto hook = [&](const ManifoldPoint& x, double value, int iteration) {
    if (observer) {
      observer(x.columns().leftCols(k).transpose(), x.columns().rightCols(k).transpose(), value,
               iteration);
    }
  };
  result.report = minimize_cg(ConstraintManifold{}, objective, std::move(start), solver, hook);
  result.final_value = result.report.value;

  const auto& x = result.report.point.columns();
  result.pair.omega_u = AnalysisOperator(x.leftCols(k).transpose(), std::move(tag_u));
  result.pair.omega_v = AnalysisOperator(x.rightCols(k).transpose(), std::move(tag_v));
  result.pair.params = params;
  return result;
}

}  // namespace cosparse
