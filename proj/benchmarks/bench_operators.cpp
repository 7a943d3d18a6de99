#include <benchmark/benchmark.h>

#include <random>

#include "cosparse/bimodal_model.hpp"
#include "cosparse/experiment.hpp"
#include "cosparse/global_operator.hpp"
#include "cosparse/random.hpp"
#include "cosparse/reconstruction.hpp"
#include "cosparse/registration.hpp"
#include "cosparse/synthetic.hpp"

using namespace cosparse;

namespace {

AnalysisOperator random_operator(Eigen::Index k, Eigen::Index n, std::uint64_t seed) {
  return AnalysisOperator(random_operator_rows(k, n, seed), "U");
}

Eigen::VectorXd noise(Eigen::Index size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Eigen::VectorXd v(size);
  for (double& x : v) x = unit_uniform(rng);
  return v;
}

void BM_GlobalApply(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const GlobalAnalysis op(random_operator(16, 9, 1), side, side);
  const Eigen::VectorXd image = noise(static_cast<Eigen::Index>(side) * side, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(op.apply(std::span<const double>(image.data(), image.size())));
  }
  state.SetItemsProcessed(state.iterations() * image.size());
}
BENCHMARK(BM_GlobalApply)->Arg(64)->Arg(128)->Arg(256);

void BM_GlobalAdjoint(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const GlobalAnalysis op(random_operator(16, 9, 1), side, side);
  const Eigen::VectorXd coeffs = noise(op.output_size(), 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(op.apply_adjoint(std::span<const double>(coeffs.data(), coeffs.size())));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(side) * side);
}
BENCHMARK(BM_GlobalAdjoint)->Arg(64)->Arg(128)->Arg(256);

void BM_LearningGradient(benchmark::State& state) {
  LearnSettings settings;
  settings.samples = static_cast<std::size_t>(state.range(0));
  const PatchDataset data = training_patches(settings);
  const Eigen::MatrixXd wu = random_operator_rows(16, 9, 4), wv = random_operator_rows(16, 9, 5);
  Eigen::MatrixXd gu, gv;
  for (auto _ : state) {
    benchmark::DoNotOptimize(learning_objective(wu, wv, data, settings.params, &gu, &gv));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(settings.samples));
}
BENCHMARK(BM_LearningGradient)->Arg(1000)->Arg(3000)->Unit(benchmark::kMicrosecond);

void BM_GuidedGradient(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const SyntheticScene scene = generate_scene(9, side, ModalityPair::intensity_depth);
  const OperatorPair pair{random_operator(16, 9, 6), random_operator(16, 9, 7), LearningParams::small_patch()};
  const GlobalAnalysis analysis_u(pair.omega_u, side, side), analysis_v(pair.omega_v, side, side);
  const Eigen::VectorXd guide = analysis_u.apply(scene.first);
  const MeasurementOperator phi = MeasurementOperator::blur_downsample(side, side, 2);
  const Eigen::VectorXd truth = scene.second.vector();
  const Eigen::VectorXd y = phi.apply(std::span<const double>(truth.data(), truth.size()));
  const GuidedObjective objective(analysis_v, guide, phi, y, pair.params.nu, 1.0);
  const Eigen::VectorXd s = noise(truth.size(), 8);
  Eigen::VectorXd gradient;
  for (auto _ : state) benchmark::DoNotOptimize(objective.value_and_gradient(s, gradient));
}
BENCHMARK(BM_GuidedGradient)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);

void BM_RegistrationGradient(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const SyntheticScene scene = generate_scene(10, side, ModalityPair::intensity_depth);
  const ModalImage moving = generate_deregistered(10, side, scene.pair, 2.0, -1.0, 3.0);
  const OperatorPair pair{random_operator(16, 9, 6), random_operator(16, 9, 7), LearningParams::small_patch()};
  RegisterSettings settings;
  settings.synthetic_size = side;
  settings.border = side / 8;
  const RegistrationProblem problem = make_registration_problem(pair, scene.first, moving, settings);
  const GroupElement tau = rigid_transform(0.5, 0.5, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(registration_gradient(problem, tau));
}
BENCHMARK(BM_RegistrationGradient)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
