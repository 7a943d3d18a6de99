#include "cosparse/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <thread>

#include "cosparse/errors.hpp"
#include "cosparse/io.hpp"
#include "cosparse/random.hpp"

namespace cosparse {
namespace {

ModalImage scaled(const ModalImage& image, double factor) {
  ModalImage out = image;
  out.vector() *= factor;
  return out;
}

}  // namespace

PatchDataset training_patches(const LearnSettings& settings) {
  std::vector<ModalImage> us, vs;
  if (!settings.images_u.empty()) {
    if (settings.images_u.size() != settings.images_v.size()) {
      throw InvalidArgument("images_u and images_v must list the same number of images");
    }
    for (std::size_t i = 0; i < settings.images_u.size(); ++i) {
      us.push_back(read_image(settings.images_u[i]));
      vs.push_back(read_image(settings.images_v[i]));
    }
  } else {
    for (int i = 0; i < settings.synthetic_scenes; ++i) {
      SyntheticScene scene = generate_scene(settings.seed + static_cast<std::uint64_t>(i),
                                            settings.synthetic_size, settings.synthetic_pair);
      us.push_back(std::move(scene.first));
      vs.push_back(std::move(scene.second));
    }
  }
  return extract_training_patches(us, vs, settings.patch_side, settings.samples, settings.seed,
                                  settings.std_threshold);
}

LearningResult learn_operators(const LearnSettings& settings, const LearningObserver& observer) {
  const PatchDataset data = training_patches(settings);
  const Eigen::Index n = data.patch_size();
  const Eigen::Index k = settings.k == 0 ? 2 * n : settings.k;
  SolverConfig solver;
  solver.max_iterations = settings.max_iterations;
  solver.gradient_norm_tolerance = settings.tolerance;
  std::string tag_v = settings.synthetic_pair == ModalityPair::intensity_depth ? "depth" : "nir";
  return learn_pair(data, k, settings.params, solver, settings.seed, "intensity", std::move(tag_v), observer);
}

ModalImage simulate_low_resolution(const ModalImage& high, int factor) {
  const MeasurementOperator phi = MeasurementOperator::blur_downsample(high.width(), high.height(), factor);
  const Eigen::VectorXd y = phi.apply(high.values());
  return ModalImage::from_vector(phi.output_width(), phi.output_height(), y, high.modality_tag());
}

SuperResolutionRun super_resolve(const OperatorPair& pair, const ModalImage& guide, const ModalImage& low,
                                 const ReconstructSettings& settings, const StageObserver& observer) {
  const MeasurementOperator phi =
      MeasurementOperator::blur_downsample(guide.width(), guide.height(), settings.factor);
  if (low.width() != phi.output_width() || low.height() != phi.output_height()) {
    throw DimensionMismatch("low-resolution image is " + std::to_string(low.width()) + "x" +
                            std::to_string(low.height()) + ", expected " + std::to_string(phi.output_width()) +
                            "x" + std::to_string(phi.output_height()));
  }
  ReconstructionProblem problem;
  problem.pair = pair;
  problem.guide = scaled(guide, kEightBitScale);
  problem.measurements = kEightBitScale * low.vector();
  problem.phi = phi;
  problem.lambda_schedule = settings.lambda_schedule;
  problem.nu = settings.nu;

  SuperResolutionRun run;
  run.nearest = upsample_nearest(low.vector(), phi);
  InitialGuess init;
  if (settings.nearest_init) {
    init = Eigen::VectorXd(kEightBitScale * run.nearest.vector());
  } else {
    std::mt19937_64 rng(settings.seed);
    Eigen::VectorXd v(static_cast<Eigen::Index>(phi.input_size()));
    for (double& x : v) x = kEightBitScale * unit_uniform(rng);
    init = std::move(v);
  }
  SolverConfig solver;
  solver.max_iterations = settings.iterations_per_stage;
  GuidedResult result = reconstruct_guided(problem, init, solver, observer);
  run.result = scaled(result.image, 1.0 / kEightBitScale);
  run.result.set_modality_tag(low.modality_tag());
  run.nearest.set_modality_tag(low.modality_tag());
  run.stages = std::move(result.stages);
  return run;
}

RegistrationProblem make_registration_problem(const OperatorPair& pair, const ModalImage& fixed,
                                              const ModalImage& moving, const RegisterSettings& settings) {
  RegistrationProblem problem;
  problem.fixed = scaled(fixed, kEightBitScale);
  problem.moving = scaled(moving, kEightBitScale);
  problem.pair = pair;
  problem.group = settings.group;
  problem.region = {settings.border, settings.border, fixed.width() - 2 * settings.border,
                    fixed.height() - 2 * settings.border};
  problem.pyramid_levels = settings.levels;
  problem.nu = settings.nu;
  problem.smoothing_sigma = settings.smoothing_sigma;
  return problem;
}

RegistrationOptions registration_options(const RegisterSettings& settings) {
  RegistrationOptions options;
  options.solver.max_iterations = settings.max_iterations;
  options.solver.gradient_norm_tolerance = settings.tolerance;
  return options;
}

RegistrationRun register_synthetic(const OperatorPair& pair, std::uint64_t seed, ModalityPair modalities,
                                   double tx, double ty, double theta_deg, const RegisterSettings& settings,
                                   const RegistrationObserver& observer) {
  const auto start = std::chrono::steady_clock::now();
  const int size = settings.synthetic_size;
  const SyntheticScene scene = generate_scene(seed, size, modalities);
  const ModalImage moving = generate_deregistered(seed, size, modalities, tx, ty, theta_deg);
  RegistrationRun run;
  run.result = register_images(make_registration_problem(pair, scene.first, moving, settings),
                               registration_options(settings), observer);
  run.residual = registration_residual(run.result.tau, tx, ty, theta_deg);
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

std::vector<SweepCell> registration_sweep(const OperatorPair& pair, std::uint64_t seed,
                                          ModalityPair modalities, const RegisterSettings& settings,
                                          int jobs, double range, double step) {
  if (!(step > 0.0) || !(range >= 0.0)) throw InvalidArgument("sweep needs step > 0 and range ≥ 0");
  if (jobs < 1) throw InvalidArgument("jobs must be at least 1");
  const int per_axis = static_cast<int>(std::floor(2.0 * range / step + 1e-9)) + 1;
  std::vector<SweepCell> cells(static_cast<std::size_t>(per_axis) * per_axis);
  for (int i = 0; i < per_axis; ++i) {
    for (int j = 0; j < per_axis; ++j) {
      SweepCell& c = cells[static_cast<std::size_t>(i) * per_axis + j];
      c.translation = -range + i * step;
      c.theta_deg = -range + j * step;
    }
  }

  const SyntheticScene scene = generate_scene(seed, settings.synthetic_size, modalities);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      SweepCell& c = cells[i];
      try {
        const ModalImage moving = generate_deregistered(seed, settings.synthetic_size, modalities,
                                                        c.translation, c.translation, c.theta_deg);
        const RegistrationResult r = register_images(
            make_registration_problem(pair, scene.first, moving, settings), registration_options(settings));
        c.residual = registration_residual(r.tau, c.translation, c.translation, c.theta_deg);
      } catch (const std::exception& e) {
        c.failed = true;
        c.error = e.what();
      }
    }
  };
  const int threads = std::min<int>(jobs, static_cast<int>(cells.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return cells;
}

}  // namespace cosparse
