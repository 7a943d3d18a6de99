#include <doctest.h>

#include <random>

#include "cosparse/errors.hpp"
#include "cosparse/reconstruction.hpp"
#include "oracles.hpp"

using namespace cosparse;

namespace {

AnalysisOperator random_operator(Eigen::Index k, Eigen::Index n, std::mt19937_64& rng, const char* tag) {
  return AnalysisOperator(oracle::centered_unit_columns(oracle::gaussian(n, k, rng)).transpose(), tag);
}

OperatorPair random_pair(std::mt19937_64& rng) {
  return {random_operator(9, 9, rng, "U"), random_operator(9, 9, rng, "V"), LearningParams::intensity_depth()};
}

std::span<const double> span(const Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

std::vector<double> as_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// Piecewise-constant block image with a co-located guide.
ModalImage blocks(int w, int h, double lo, double hi) {
  ModalImage img(w, h);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) img(r, c) = (c < w / 2) == (r < h / 3) ? hi : lo;
  return img;
}

}  // namespace

TEST_CASE("identity and mask measurements") {
  std::mt19937_64 rng(41);
  const Eigen::VectorXd x = oracle::gaussian(12, 1, rng);
  const MeasurementOperator id = MeasurementOperator::identity(4, 3);
  CHECK(id.apply(span(x)) == x);
  const MeasurementOperator mask = MeasurementOperator::mask(4, 3, {5, 0, 11});
  const Eigen::VectorXd y = mask.apply(span(x));
  REQUIRE(y.size() == 3);
  CHECK(y[0] == x[5]);
  CHECK(y[1] == x[0]);
  CHECK(y[2] == x[11]);
  CHECK_THROWS_AS(MeasurementOperator::mask(4, 3, {1, 1}), InvalidArgument);
  CHECK_THROWS_AS(MeasurementOperator::mask(4, 3, {12}), InvalidArgument);
  CHECK_THROWS_AS(MeasurementOperator::blur_downsample(4, 3, 0), InvalidArgument);
}

TEST_CASE("blur-downsample kernel and constant images") {
  const MeasurementOperator phi = MeasurementOperator::blur_downsample(8, 8, 2);
  CHECK(phi.kernel_side() == 3);
  CHECK(phi.sample_offset() == 0);
  CHECK(phi.output_width() == 4);
  double sum = 0.0;
  for (double k : phi.kernel()) sum += k;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
  // σ = 2/3: the edge-to-center weight ratio is exp(−1/(2σ²)).
  CHECK(phi.kernel()[3] / phi.kernel()[4] == doctest::Approx(std::exp(-9.0 / 8.0)).epsilon(1e-14));

  const Eigen::VectorXd flat = Eigen::VectorXd::Constant(64, 0.37);
  const Eigen::VectorXd low = phi.apply(span(flat));
  CHECK(low.size() == 16);
  CHECK((low.array() - 0.37).abs().maxCoeff() < 1e-15);
  CHECK(MeasurementOperator::blur_downsample(9, 7, 3).sample_offset() == 1);
}

TEST_CASE("blur-downsample matches the direct convolution") {
  std::vector<double> ramp(64);
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 8; ++c) ramp[static_cast<std::size_t>(r * 8 + c)] = 0.25 * c + 0.5 * r * r;
  int ow = 0, oh = 0;
  const auto expected = oracle::blur_decimate(ramp, 8, 8, 2, &ow, &oh);
  const Eigen::VectorXd got = MeasurementOperator::blur_downsample(8, 8, 2).apply(ramp);
  REQUIRE(static_cast<std::size_t>(got.size()) == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) CHECK(std::abs(got[static_cast<Eigen::Index>(i)] - expected[i]) < 1e-12);

  std::mt19937_64 rng(42);
  for (int d : {3, 4}) {
    const Eigen::VectorXd x = oracle::gaussian(11 * 9, 1, rng);
    const auto want = oracle::blur_decimate(as_std(x), 11, 9, d, &ow, &oh);
    const MeasurementOperator phi = MeasurementOperator::blur_downsample(11, 9, d);
    CHECK(phi.output_width() == ow);
    CHECK(phi.output_height() == oh);
    const Eigen::VectorXd y = phi.apply(span(x));
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(std::abs(y[static_cast<Eigen::Index>(i)] - want[i]) < 1e-12);
  }
}

TEST_CASE("measurement adjoints pass the dot-product test") {
  std::mt19937_64 rng(43);
  for (const MeasurementOperator& phi :
       {MeasurementOperator::identity(6, 5), MeasurementOperator::mask(6, 5, {3, 7, 29, 0, 14}),
        MeasurementOperator::blur_downsample(6, 5, 2), MeasurementOperator::blur_downsample(13, 10, 3)}) {
    for (int trial = 0; trial < 10; ++trial) {
      const Eigen::VectorXd x = oracle::gaussian(static_cast<Eigen::Index>(phi.input_size()), 1, rng);
      const Eigen::VectorXd y = oracle::gaussian(static_cast<Eigen::Index>(phi.output_size()), 1, rng);
      CHECK(std::abs(phi.apply(span(x)).dot(y) - x.dot(phi.apply_adjoint(span(y)))) < 1e-10);
    }
  }
}

TEST_CASE("nearest-neighbor upsampling replicates samples") {
  const MeasurementOperator phi = MeasurementOperator::blur_downsample(5, 4, 2);
  Eigen::VectorXd y(static_cast<Eigen::Index>(phi.output_size()));
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = static_cast<double>(i);
  const ModalImage up = upsample_nearest(y, phi);
  CHECK(up.width() == 5);
  CHECK(up(0, 0) == 0.0);
  CHECK(up(1, 1) == 0.0);
  CHECK(up(0, 2) == 1.0);
  CHECK(up(3, 4) == y[y.size() - 1]);
  CHECK_THROWS_AS(upsample_nearest(Eigen::VectorXd::Zero(3), MeasurementOperator::mask(5, 4, {1, 2, 3})),
                  InvalidArgument);
}

TEST_CASE("lambda schedules") {
  const auto def = default_lambda_schedule();
  CHECK(def == std::vector<double>{1000.0, 100.0, 10.0, 1.0});
  CHECK_NOTHROW(validate_lambda_schedule(def));
  CHECK_THROWS_AS(validate_lambda_schedule(std::vector<double>{}), InvalidArgument);
  CHECK_THROWS_AS(validate_lambda_schedule(std::vector<double>{10.0, 10.0, 1.0}), InvalidArgument);
  CHECK_THROWS_AS(validate_lambda_schedule(std::vector<double>{10.0, 2.0}), InvalidArgument);
  CHECK_THROWS_AS(validate_lambda_schedule(std::vector<double>{-1.0, 1.0}), InvalidArgument);
}

TEST_CASE("guided objective gradient and data term") {
  std::mt19937_64 rng(44);
  const OperatorPair pair = random_pair(rng);
  const ModalImage guide = ModalImage::from_vector(8, 8, 10.0 * oracle::gaussian(64, 1, rng));
  const Eigen::VectorXd c = precompute_guide_coeffs(pair, guide);

  ModalImage flat(8, 8);
  for (double& v : flat.values()) v = 4.0;
  CHECK(precompute_guide_coeffs(pair, flat).cwiseAbs().maxCoeff() < 1e-13);

  const GlobalAnalysis analysis(pair.omega_v, 8, 8);
  const MeasurementOperator phi = MeasurementOperator::blur_downsample(8, 8, 2);
  const Eigen::VectorXd truth = 10.0 * oracle::gaussian(64, 1, rng);
  const Eigen::VectorXd y = phi.apply(span(truth));
  GuidedObjective f(analysis, c, phi, y, 0.5, 3.0);

  CHECK(f.value(truth) == doctest::Approx(3.0 * f.coupling(truth)).epsilon(1e-13));
  const Eigen::VectorXd s = 10.0 * oracle::gaussian(64, 1, rng);
  Eigen::VectorXd grad;
  const double v = f.value_and_gradient(s, grad);
  CHECK(v == doctest::Approx(f.value(s)).epsilon(1e-15));
  const auto fn = [&](const Eigen::VectorXd& x) { return f.value(x); };
  CHECK(oracle::relative_error(grad, oracle::numeric_gradient(fn, s, 1e-5)) < 1e-4);

  // Fidelity gradient alone: 2Φᵀ(Φs − y) is what remains as λ → 0.
  f.set_lambda(1e-300);
  f.value_and_gradient(s, grad);
  const Eigen::VectorXd residual = phi.apply(span(s)) - y;
  CHECK((grad - 2.0 * phi.apply_adjoint(span(residual))).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("guided reconstruction is monotone per stage and deterministic") {
  std::mt19937_64 rng(45);
  const OperatorPair pair = random_pair(rng);
  const ModalImage guide = blocks(16, 16, 40.0, 200.0);
  const ModalImage truth = blocks(16, 16, 20.0, 120.0);
  ReconstructionProblem problem;
  problem.pair = pair;
  problem.guide = guide;
  problem.phi = MeasurementOperator::blur_downsample(16, 16, 2);
  problem.measurements = problem.phi.apply(truth.values());
  problem.lambda_schedule = {100.0, 10.0, 1.0};

  std::vector<std::vector<double>> values(3);
  const auto observe = [&](std::size_t stage, int, double value) { values[stage].push_back(value); };
  const GuidedResult a = reconstruct_guided(problem, RandomInit{7}, SolverConfig{30}, observe);
  const GuidedResult b = reconstruct_guided(problem, RandomInit{7}, SolverConfig{30});
  REQUIRE(a.stages.size() == 3);
  for (const auto& stage : values) {
    for (std::size_t i = 1; i < stage.size(); ++i) CHECK(stage[i] <= stage[i - 1]);
  }
  for (const StageReport& s : a.stages) {
    CHECK(std::isfinite(s.initial_value));
    CHECK(s.final_value <= s.initial_value);
  }
  CHECK(a.image.vector() == b.image.vector());

  ReconstructionProblem bad = problem;
  bad.measurements = Eigen::VectorXd::Zero(5);
  CHECK_THROWS_AS(reconstruct_guided(bad, RandomInit{7}, SolverConfig{}), DimensionMismatch);
  bad = problem;
  bad.lambda_schedule = {10.0, 3.0};
  CHECK_THROWS_AS(reconstruct_guided(bad, RandomInit{7}, SolverConfig{}), InvalidArgument);
}

TEST_CASE("joint objective gradient") {
  std::mt19937_64 rng(46);
  const OperatorPair pair = random_pair(rng);
  const GlobalAnalysis au(pair.omega_u, 6, 6), av(pair.omega_v, 6, 6);
  const MeasurementOperator pu = MeasurementOperator::identity(6, 6);
  const MeasurementOperator pv = MeasurementOperator::blur_downsample(6, 6, 2);
  const Eigen::VectorXd yu = 5.0 * oracle::gaussian(36, 1, rng), yv = 5.0 * oracle::gaussian(9, 1, rng);
  for (bool clamp : {false, true}) {
    JointObjective f(au, av, pu, pv, yu, yv, 2.0, 7.0, clamp);
    const Eigen::VectorXd s = 5.0 * oracle::gaussian(72, 1, rng);
    Eigen::VectorXd grad;
    f.value_and_gradient(s, grad);
    Eigen::VectorXd fd = oracle::numeric_gradient([&](const Eigen::VectorXd& x) { return f.value(x); }, s, 1e-5);
    if (clamp) fd.head(36).setZero();
    CHECK(oracle::relative_error(grad, fd) < 1e-4);
  }
}

TEST_CASE("joint recovery with a clamped guide reduces to guided recovery") {
  std::mt19937_64 rng(47);
  const OperatorPair pair = random_pair(rng);
  const ModalImage guide = blocks(12, 12, 30.0, 150.0);
  const ModalImage truth = blocks(12, 12, 10.0, 90.0);
  const MeasurementOperator id = MeasurementOperator::identity(12, 12);
  const MeasurementOperator phi = MeasurementOperator::blur_downsample(12, 12, 2);
  const Eigen::VectorXd y = phi.apply(truth.values());
  const std::vector<double> schedule{10.0, 1.0};

  ReconstructionProblem problem;
  problem.pair = pair;
  problem.guide = guide;
  problem.phi = phi;
  problem.measurements = y;
  problem.lambda_schedule = schedule;
  const Eigen::VectorXd start = Eigen::VectorXd::Constant(144, 50.0);
  const GuidedResult guided = reconstruct_guided(problem, start, SolverConfig{40});

  JointOptions options;
  options.clamp_u = true;
  options.init_u = Eigen::VectorXd(guide.vector());
  options.init_v = start;
  const JointResult joint =
      reconstruct_joint(pair, guide.vector(), y, id, phi, schedule, SolverConfig{40}, options);
  CHECK((joint.image_u.vector() - guide.vector()).norm() == 0.0);
  CHECK((joint.image_v.vector() - guided.image.vector()).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("joint recovery from zero measurements drives the coupling down") {
  std::mt19937_64 rng(48);
  const OperatorPair pair = random_pair(rng);
  const MeasurementOperator phi = MeasurementOperator::blur_downsample(10, 10, 2);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(phi.output_size()));
  const std::vector<double> schedule{1000.0, 100.0, 10.0, 1.0};
  JointOptions options;
  const Eigen::VectorXd su = 50.0 * oracle::gaussian(100, 1, rng), sv = 50.0 * oracle::gaussian(100, 1, rng);
  options.init_u = su;
  options.init_v = sv;
  const JointResult r = reconstruct_joint(pair, zero, zero, phi, phi, schedule, SolverConfig{60}, options);
  REQUIRE(r.stages.size() == 4);

  const GlobalAnalysis au(pair.omega_u, 10, 10), av(pair.omega_v, 10, 10);
  JointObjective f(au, av, phi, phi, zero, zero, pair.params.nu, 1.0, false);
  Eigen::VectorXd start(200);
  start << su, sv;
  // Starting far from the prior's minimizer, every stage lowers g further.
  CHECK(r.stages.back().coupling < 1e-3 * f.coupling(start));
  for (std::size_t i = 1; i < r.stages.size(); ++i) CHECK(r.stages[i].coupling <= r.stages[i - 1].coupling);
}

TEST_CASE("reconstruction metrics") {
  ModalImage truth(5, 5), shifted(5, 5);
  for (int i = 0; i < 25; ++i) {
    truth.values()[static_cast<std::size_t>(i)] = 0.1 * i;
    shifted.values()[static_cast<std::size_t>(i)] = 0.1 * i + 2.0;
  }
  const ReconstructionMetrics same = evaluate_metrics(truth, truth, 1.0);
  CHECK(same.rmse == 0.0);
  CHECK(same.bad_pixel_pct == 0.0);
  const ReconstructionMetrics off = evaluate_metrics(shifted, truth, 1.0);
  CHECK(off.rmse == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(off.bad_pixel_pct == 100.0);

  std::mt19937_64 rng(49);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::VectorXd a = oracle::gaussian(25, 1, rng), b = oracle::gaussian(25, 1, rng);
    const auto m = evaluate_metrics(ModalImage::from_vector(5, 5, 0.01 * a), ModalImage::from_vector(5, 5, 0.01 * b),
                                    1.0, 255.0);
    const auto want = oracle::metrics(as_std(0.01 * a), as_std(0.01 * b), 1.0, 255.0);
    CHECK(m.rmse == doctest::Approx(want.rmse).epsilon(1e-13));
    CHECK(m.bad_pixel_pct == doctest::Approx(want.bad_pct).epsilon(1e-13));
  }
  CHECK_THROWS_AS(evaluate_metrics(truth, ModalImage(4, 5), 1.0), DimensionMismatch);
}
