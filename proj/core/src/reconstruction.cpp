#include "cosparse/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_set>

#include "cosparse/errors.hpp"
#include "cosparse/random.hpp"

namespace cosparse {

MeasurementOperator MeasurementOperator::identity(int width, int height) {
  if (width <= 0 || height <= 0) throw InvalidArgument("image dimensions must be positive");
  MeasurementOperator op;
  op.kind_ = Kind::identity;
  op.in_w_ = op.out_w_ = width;
  op.in_h_ = op.out_h_ = height;
  return op;
}

MeasurementOperator MeasurementOperator::mask(int width, int height, std::vector<std::size_t> kept) {
  if (width <= 0 || height <= 0) throw InvalidArgument("image dimensions must be positive");
  const std::size_t total = static_cast<std::size_t>(width) * height;
  std::unordered_set<std::size_t> seen;
  for (std::size_t idx : kept) {
    if (idx >= total) throw InvalidArgument("mask index out of range");
    if (!seen.insert(idx).second) throw InvalidArgument("mask indices must be unique");
  }
  if (kept.empty()) throw InvalidArgument("mask keeps no pixels");
  MeasurementOperator op;
  op.kind_ = Kind::mask;
  op.in_w_ = width;
  op.in_h_ = height;
  op.out_w_ = static_cast<int>(kept.size());
  op.out_h_ = 1;
  op.kept_ = std::move(kept);
  return op;
}

MeasurementOperator MeasurementOperator::blur_downsample(int width, int height, int factor) {
  if (width <= 0 || height <= 0) throw InvalidArgument("image dimensions must be positive");
  if (factor < 1) throw InvalidArgument("downsampling factor must be at least 1");
  MeasurementOperator op;
  op.kind_ = Kind::blur_downsample;
  op.in_w_ = width;
  op.in_h_ = height;
  op.factor_ = factor;
  op.offset_ = (factor - 1) / 2;
  op.kernel_side_ = 2 * factor - 1;
  op.kernel_ = gaussian_kernel(op.kernel_side_, factor / 3.0);
  op.out_w_ = (width - op.offset_ + factor - 1) / factor;
  op.out_h_ = (height - op.offset_ + factor - 1) / factor;
  return op;
}

Eigen::VectorXd MeasurementOperator::apply(std::span<const double> image) const {
  if (image.size() != input_size()) throw DimensionMismatch("image size does not match Φ");
  Eigen::VectorXd out(static_cast<Eigen::Index>(output_size()));
  switch (kind_) {
    case Kind::identity:
      for (std::size_t i = 0; i < image.size(); ++i) out[static_cast<Eigen::Index>(i)] = image[i];
      break;
    case Kind::mask:
      for (std::size_t i = 0; i < kept_.size(); ++i) out[static_cast<Eigen::Index>(i)] = image[kept_[i]];
      break;
    case Kind::blur_downsample: {
      const int half = kernel_side_ / 2;
      for (int orow = 0; orow < out_h_; ++orow) {
        const int r = offset_ + orow * factor_;
        for (int ocol = 0; ocol < out_w_; ++ocol) {
          const int c = offset_ + ocol * factor_;
          double acc = 0.0;
          for (int i = 0; i < kernel_side_; ++i) {
            const std::size_t row = static_cast<std::size_t>(reflect_index(r + i - half, in_h_));
            for (int j = 0; j < kernel_side_; ++j) {
              acc += kernel_[static_cast<std::size_t>(i) * kernel_side_ + j] *
                     image[row * in_w_ + reflect_index(c + j - half, in_w_)];
            }
          }
          out[static_cast<Eigen::Index>(orow) * out_w_ + ocol] = acc;
        }
      }
      break;
    }
  }
  return out;
}

Eigen::VectorXd MeasurementOperator::apply_adjoint(std::span<const double> measurements) const {
  if (measurements.size() != output_size()) throw DimensionMismatch("measurement size does not match Φ");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(input_size()));
  switch (kind_) {
    case Kind::identity:
      for (std::size_t i = 0; i < measurements.size(); ++i) out[static_cast<Eigen::Index>(i)] = measurements[i];
      break;
    case Kind::mask:
      for (std::size_t i = 0; i < kept_.size(); ++i) out[static_cast<Eigen::Index>(kept_[i])] += measurements[i];
      break;
    case Kind::blur_downsample: {
      const int half = kernel_side_ / 2;
      for (int orow = 0; orow < out_h_; ++orow) {
        const int r = offset_ + orow * factor_;
        for (int ocol = 0; ocol < out_w_; ++ocol) {
          const int c = offset_ + ocol * factor_;
          const double m = measurements[static_cast<std::size_t>(orow) * out_w_ + ocol];
          for (int i = 0; i < kernel_side_; ++i) {
            const std::size_t row = static_cast<std::size_t>(reflect_index(r + i - half, in_h_));
            for (int j = 0; j < kernel_side_; ++j) {
              out[static_cast<Eigen::Index>(row * in_w_ + reflect_index(c + j - half, in_w_))] +=
                  kernel_[static_cast<std::size_t>(i) * kernel_side_ + j] * m;
            }
          }
        }
      }
      break;
    }
  }
  return out;
}

ModalImage upsample_nearest(const Eigen::VectorXd& measurements, const MeasurementOperator& phi) {
  if (phi.kind() == MeasurementOperator::Kind::mask) {
    throw InvalidArgument("nearest-neighbor upsampling needs a grid measurement");
  }
  if (static_cast<std::size_t>(measurements.size()) != phi.output_size()) {
    throw DimensionMismatch("measurement size does not match Φ");
  }
  ModalImage out(phi.input_width(), phi.input_height());
  const int d = phi.factor();
  for (int r = 0; r < out.height(); ++r) {
    const int lr = std::min(r / d, phi.output_height() - 1);
    for (int c = 0; c < out.width(); ++c) {
      const int lc = std::min(c / d, phi.output_width() - 1);
      out(r, c) = measurements[static_cast<Eigen::Index>(lr) * phi.output_width() + lc];
    }
  }
  return out;
}

std::vector<double> default_lambda_schedule() { return {1000.0, 100.0, 10.0, 1.0}; }

void validate_lambda_schedule(std::span<const double> schedule) {
  if (schedule.empty()) throw InvalidArgument("lambda schedule is empty");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (!(schedule[i] > 0.0) || !std::isfinite(schedule[i])) {
      throw InvalidArgument("lambda values must be positive");
    }
    if (i > 0 && !(schedule[i] < schedule[i - 1])) {
      throw InvalidArgument("lambda schedule must be strictly decreasing");
    }
  }
  if (schedule.back() != 1.0) throw InvalidArgument("lambda schedule must end at 1");
}

void ReconstructionProblem::validate() const {
  pair.validate();
  validate_lambda_schedule(lambda_schedule);
  if (guide.width() != phi.input_width() || guide.height() != phi.input_height()) {
    throw DimensionMismatch("guide and measurement operator disagree on the image size");
  }
  if (static_cast<std::size_t>(measurements.size()) != phi.output_size()) {
    throw DimensionMismatch("measurement vector does not match Φ");
  }
  if (!(noise_bound >= 0.0)) throw InvalidArgument("noise bound must be non-negative");
  if (!(coupling_weight() > 0.0)) throw InvalidArgument("coupling weight ν must be positive");
  guide.check_finite();
}

Eigen::VectorXd precompute_guide_coeffs(const OperatorPair& pair, const ModalImage& guide) {
  return GlobalAnalysis(pair.omega_u, guide.width(), guide.height()).apply(guide);
}

namespace {

Eigen::VectorXd uniform_image(std::size_t size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Eigen::VectorXd v(static_cast<Eigen::Index>(size));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v[i] = unit_uniform(rng);
  }
  return v;
}

Eigen::VectorXd resolve_init(const InitialGuess& init, std::size_t size) {
  if (const auto* explicit_init = std::get_if<Eigen::VectorXd>(&init)) {
    if (static_cast<std::size_t>(explicit_init->size()) != size) {
      throw DimensionMismatch("initial image has the wrong size");
    }
    return *explicit_init;
  }
  return uniform_image(size, std::get<RandomInit>(init).seed);
}

double coupling_sum(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double nu) {
  return (nu * (a.array().square() + b.array().square())).log1p().sum();
}

template <class Objective>
StageReport run_stage(Objective& objective, Eigen::VectorXd& s, double lambda, std::size_t stage,
                      const SolverConfig& solver, const StageObserver& observer) {
  objective.set_lambda(lambda);
  StageReport rep;
  rep.lambda = lambda;
  rep.initial_value = objective.value(s);
  if (!std::isfinite(rep.initial_value)) throw NonFiniteObjective("stage start objective is not finite");
  auto hook = [&](const Eigen::VectorXd&, double value, int iteration) {
    if (observer) observer(stage, iteration, value);
  };
  auto report = minimize_cg(EuclideanSpace{}, objective, s, solver, hook);
  s = std::move(report.point);
  rep.final_value = report.value;
  rep.iterations = report.iterations;
  rep.status = report.status;
  rep.coupling = objective.coupling(s);
  return rep;
}

}  // namespace

GuidedObjective::GuidedObjective(const GlobalAnalysis& analysis, const Eigen::VectorXd& guide_coeffs,
                                 const MeasurementOperator& phi, const Eigen::VectorXd& measurements,
                                 double nu, double lambda)
    : analysis_(analysis), c_(guide_coeffs), phi_(phi), y_(measurements), nu_(nu), lambda_(lambda) {
  if (guide_coeffs.size() != analysis.output_size()) {
    throw DimensionMismatch("guide coefficients do not match the global operator");
  }
}

double GuidedObjective::coupling(const Eigen::VectorXd& s) const {
  return coupling_sum(c_, analysis_.apply(std::span<const double>(s.data(), s.size())), nu_);
}

double GuidedObjective::value(const Eigen::VectorXd& s) const {
  const std::span<const double> view(s.data(), static_cast<std::size_t>(s.size()));
  const Eigen::VectorXd residual = phi_.apply(view) - y_;
  return lambda_ * coupling_sum(c_, analysis_.apply(view), nu_) + residual.squaredNorm();
}

double GuidedObjective::value_and_gradient(const Eigen::VectorXd& s, Eigen::VectorXd& gradient) const {
  const std::span<const double> view(s.data(), static_cast<std::size_t>(s.size()));
  const Eigen::VectorXd b = analysis_.apply(view);
  const Eigen::ArrayXd energy = nu_ * (c_.array().square() + b.array().square());
  const Eigen::VectorXd dg = ((2.0 * nu_ * lambda_) * b.array() / (1.0 + energy)).matrix();
  const Eigen::VectorXd residual = phi_.apply(view) - y_;
  gradient = analysis_.apply_adjoint(std::span<const double>(dg.data(), static_cast<std::size_t>(dg.size()))) +
             2.0 * phi_.apply_adjoint(std::span<const double>(residual.data(),
                                                              static_cast<std::size_t>(residual.size())));
  return lambda_ * energy.log1p().sum() + residual.squaredNorm();
}

GuidedResult reconstruct_guided(const ReconstructionProblem& problem, const InitialGuess& init,
                                const SolverConfig& solver, const StageObserver& observer) {
  problem.validate();
  const ModalImage& guide = problem.guide;
  const Eigen::VectorXd c = precompute_guide_coeffs(problem.pair, guide);
  const GlobalAnalysis analysis(problem.pair.omega_v, guide.width(), guide.height());
  GuidedObjective objective(analysis, c, problem.phi, problem.measurements,
                            problem.coupling_weight(), problem.lambda_schedule.front());

  Eigen::VectorXd s = resolve_init(init, problem.phi.input_size());
  GuidedResult result;
  for (std::size_t stage = 0; stage < problem.lambda_schedule.size(); ++stage) {
    result.stages.push_back(run_stage(objective, s, problem.lambda_schedule[stage], stage, solver, observer));
  }
  result.image = ModalImage::from_vector(guide.width(), guide.height(), s,
                                         problem.pair.omega_v.modality_tag());
  return result;
}

JointObjective::JointObjective(const GlobalAnalysis& analysis_u, const GlobalAnalysis& analysis_v,
                               const MeasurementOperator& phi_u, const MeasurementOperator& phi_v,
                               const Eigen::VectorXd& y_u, const Eigen::VectorXd& y_v, double nu,
                               double lambda, bool clamp_u)
    : au_(analysis_u), av_(analysis_v), phi_u_(phi_u), phi_v_(phi_v), y_u_(y_u), y_v_(y_v), nu_(nu),
      lambda_(lambda), clamp_u_(clamp_u) {}

double JointObjective::coupling(const Eigen::VectorXd& s) const {
  const Eigen::Index n = au_.input_size();
  return coupling_sum(au_.apply(std::span<const double>(s.data(), n)),
                      av_.apply(std::span<const double>(s.data() + n, n)), nu_);
}

double JointObjective::value(const Eigen::VectorXd& s) const {
  const Eigen::Index n = au_.input_size();
  const std::span<const double> su(s.data(), static_cast<std::size_t>(n));
  const std::span<const double> sv(s.data() + n, static_cast<std::size_t>(n));
  return lambda_ * coupling_sum(au_.apply(su), av_.apply(sv), nu_) +
         (phi_u_.apply(su) - y_u_).squaredNorm() + (phi_v_.apply(sv) - y_v_).squaredNorm();
}

double JointObjective::value_and_gradient(const Eigen::VectorXd& s, Eigen::VectorXd& gradient) const {
  const Eigen::Index n = au_.input_size();
  const std::span<const double> su(s.data(), static_cast<std::size_t>(n));
  const std::span<const double> sv(s.data() + n, static_cast<std::size_t>(n));
  const Eigen::VectorXd a = au_.apply(su);
  const Eigen::VectorXd b = av_.apply(sv);
  const Eigen::ArrayXd energy = nu_ * (a.array().square() + b.array().square());
  const Eigen::ArrayXd weight = (2.0 * nu_ * lambda_) / (1.0 + energy);
  const Eigen::VectorXd ru = phi_u_.apply(su) - y_u_;
  const Eigen::VectorXd rv = phi_v_.apply(sv) - y_v_;

  gradient.resize(2 * n);
  if (clamp_u_) {
    gradient.head(n).setZero();
  } else {
    const Eigen::VectorXd da = (weight * a.array()).matrix();
    gradient.head(n) = au_.apply_adjoint(std::span<const double>(da.data(), static_cast<std::size_t>(da.size()))) +
                       2.0 * phi_u_.apply_adjoint(std::span<const double>(ru.data(), static_cast<std::size_t>(ru.size())));
  }
  const Eigen::VectorXd db = (weight * b.array()).matrix();
  gradient.tail(n) = av_.apply_adjoint(std::span<const double>(db.data(), static_cast<std::size_t>(db.size()))) +
                     2.0 * phi_v_.apply_adjoint(std::span<const double>(rv.data(), static_cast<std::size_t>(rv.size())));
  return lambda_ * energy.log1p().sum() + ru.squaredNorm() + rv.squaredNorm();
}

JointResult reconstruct_joint(const OperatorPair& pair, const Eigen::VectorXd& y_u,
                              const Eigen::VectorXd& y_v, const MeasurementOperator& phi_u,
                              const MeasurementOperator& phi_v, std::span<const double> lambda_schedule,
                              const SolverConfig& solver, const JointOptions& options,
                              const StageObserver& observer) {
  pair.validate();
  validate_lambda_schedule(lambda_schedule);
  if (phi_u.input_width() != phi_v.input_width() || phi_u.input_height() != phi_v.input_height()) {
    throw DimensionMismatch("both modalities must share the image grid");
  }
  if (static_cast<std::size_t>(y_u.size()) != phi_u.output_size() ||
      static_cast<std::size_t>(y_v.size()) != phi_v.output_size()) {
    throw DimensionMismatch("measurement vectors do not match their operators");
  }
  const double nu = options.nu.value_or(pair.params.nu);
  if (!(nu > 0.0)) throw InvalidArgument("coupling weight ν must be positive");
  const int w = phi_u.input_width();
  const int h = phi_u.input_height();
  const GlobalAnalysis au(pair.omega_u, w, h);
  const GlobalAnalysis av(pair.omega_v, w, h);
  JointObjective objective(au, av, phi_u, phi_v, y_u, y_v, nu, lambda_schedule.front(), options.clamp_u);

  const std::size_t n = phi_u.input_size();
  Eigen::VectorXd s(static_cast<Eigen::Index>(2 * n));
  s.head(static_cast<Eigen::Index>(n)) = resolve_init(options.init_u, n);
  s.tail(static_cast<Eigen::Index>(n)) = resolve_init(options.init_v, n);

  JointResult result;
  for (std::size_t stage = 0; stage < lambda_schedule.size(); ++stage) {
    result.stages.push_back(run_stage(objective, s, lambda_schedule[stage], stage, solver, observer));
  }
  result.image_u = ModalImage::from_vector(w, h, s.head(static_cast<Eigen::Index>(n)), pair.omega_u.modality_tag());
  result.image_v = ModalImage::from_vector(w, h, s.tail(static_cast<Eigen::Index>(n)), pair.omega_v.modality_tag());
  return result;
}

ReconstructionMetrics evaluate_metrics(const ModalImage& result, const ModalImage& ground_truth,
                                       double delta, double value_scale) {
  if (!result.same_shape(ground_truth)) throw DimensionMismatch("result and ground truth differ in size");
  double sq = 0.0;
  std::size_t bad = 0;
  const auto a = result.values();
  const auto b = ground_truth.values();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double err = value_scale * (a[i] - b[i]);
    sq += err * err;
    if (std::abs(err) > delta) ++bad;
  }
  const double count = static_cast<double>(a.size());
  return {std::sqrt(sq / count), 100.0 * static_cast<double>(bad) / count};
}

}  // namespace cosparse
