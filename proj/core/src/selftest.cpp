#include "cosparse/selftest.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "cosparse/bimodal_model.hpp"
#include "cosparse/config.hpp"
#include "cosparse/global_operator.hpp"
#include "cosparse/io.hpp"
#include "cosparse/lie_group.hpp"
#include "cosparse/manifold.hpp"
#include "cosparse/random.hpp"
#include "cosparse/reconstruction.hpp"
#include "cosparse/registration.hpp"
#include "cosparse/synthetic.hpp"

namespace cosparse {
namespace {

struct Outcome {
  double worst = 0.0;
  double limit = 0.0;
  bool passed() const { return worst < limit; }
};

using Check = Outcome (*)(std::mt19937_64&);

ManifoldPoint random_point(Eigen::Index n, Eigen::Index k, std::mt19937_64& rng) {
  return project_to_manifold(gaussian_matrix(n, k, rng));
}

TangentVector random_tangent(const ManifoldPoint& x, std::mt19937_64& rng) {
  return tangent_project(x, gaussian_matrix(x.dimension(), x.count(), rng));
}

Outcome geodesic_constraints(std::mt19937_64& rng) {
  Outcome o{0.0, 1e-10};
  for (int trial = 0; trial < 100; ++trial) {
    const ManifoldPoint x = random_point(9, 16, rng);
    const TangentVector h = random_tangent(x, rng);
    const double t = uniform(rng, -3.0, 3.0);
    o.worst = std::max(o.worst, constraint_violation(geodesic(x, h, t).columns()));
  }
  return o;
}

Outcome transport_isometry(std::mt19937_64& rng) {
  Outcome o{0.0, 1e-10};
  for (int trial = 0; trial < 100; ++trial) {
    const ManifoldPoint x = random_point(9, 16, rng);
    const TangentVector h = random_tangent(x, rng);
    const TangentVector a = random_tangent(x, rng);
    const TangentVector b = random_tangent(x, rng);
    const double t = uniform(rng, -3.0, 3.0);
    const TangentVector ta = parallel_transport(x, h, t, a);
    const TangentVector tb = parallel_transport(x, h, t, b);
    const double scale = std::sqrt(inner(a, a) * inner(b, b));
    o.worst = std::max(o.worst, std::abs(inner(ta, tb) - inner(a, b)) / scale);
    // The transported vector must be tangent at the end point.
    const ManifoldPoint y = geodesic(x, h, t);
    const TangentVector back = tangent_project(y, ta.columns);
    o.worst = std::max(o.worst, (back.columns - ta.columns).norm() / std::sqrt(inner(a, a)));
  }
  return o;
}

PatchDataset random_patches(Eigen::Index n, Eigen::Index m, std::mt19937_64& rng) {
  PatchDataset d;
  d.u = gaussian_matrix(n, m, rng);
  d.v = gaussian_matrix(n, m, rng);
  d.std_u.assign(static_cast<std::size_t>(m), 1.0);
  d.std_v.assign(static_cast<std::size_t>(m), 1.0);
  return d;
}

Outcome learning_gradient(std::mt19937_64& rng) {
  Outcome o{0.0, 1e-5};
  const Eigen::Index shapes[2][3] = {{4, 6, 1}, {9, 16, 5}};
  for (const auto& s : shapes) {
    for (int trial = 0; trial < 3; ++trial) {
      const PatchDataset data = random_patches(s[0], s[2], rng);
      const Eigen::MatrixXd u = random_operator_rows(s[1], s[0], rng());
      const Eigen::MatrixXd v = random_operator_rows(s[1], s[0], rng());
      const LearningParams params = LearningParams::small_patch();
      Eigen::MatrixXd gu, gv;
      learning_objective(u, v, data, params, &gu, &gv);
      Eigen::MatrixXd fu(u.rows(), u.cols()), fv(v.rows(), v.cols());
      const double h = 1e-6;
      for (Eigen::Index i = 0; i < u.size(); ++i) {
        Eigen::MatrixXd up = u, um = u, vp = v, vm = v;
        up(i) += h;
        um(i) -= h;
        vp(i) += h;
        vm(i) -= h;
        fu(i) = (learning_objective(up, v, data, params) - learning_objective(um, v, data, params)) / (2 * h);
        fv(i) = (learning_objective(u, vp, data, params) - learning_objective(u, vm, data, params)) / (2 * h);
      }
      const double err = std::sqrt((fu - gu).squaredNorm() + (fv - gv).squaredNorm()) /
                         std::sqrt(gu.squaredNorm() + gv.squaredNorm());
      o.worst = std::max(o.worst, err);
    }
  }
  return o;
}

Outcome global_adjoint(std::mt19937_64& rng) {
  Outcome o{0.0, 1e-10};
  const int shapes[4][3] = {{4, 4, 3}, {7, 5, 3}, {9, 12, 4}, {10, 10, 5}};
  for (const auto& s : shapes) {
    const int n = s[2] * s[2];
    const AnalysisOperator op(random_operator_rows(2 * n, n, rng()), "U");
    for (PatchBoundary boundary : {PatchBoundary::reflective, PatchBoundary::valid}) {
      const GlobalAnalysis g(op, s[0], s[1], boundary);
      for (int trial = 0; trial < 5; ++trial) {
        const Eigen::VectorXd x = gaussian_matrix(g.input_size(), 1, rng);
        const Eigen::VectorXd y = gaussian_matrix(g.output_size(), 1, rng);
        const double lhs = g.apply(std::span<const double>(x.data(), static_cast<std::size_t>(x.size()))).dot(y);
        const double rhs = x.dot(g.apply_adjoint(std::span<const double>(y.data(), static_cast<std::size_t>(y.size()))));
        o.worst = std::max(o.worst, std::abs(lhs - rhs) / (x.norm() * y.norm()));
      }
    }
  }
  return o;
}

Outcome measurement_adjoint(std::mt19937_64& rng) {
  Outcome o{0.0, 1e-10};
  for (int factor : {2, 3, 4}) {
    const MeasurementOperator phi = MeasurementOperator::blur_downsample(24, 17, factor);
    for (int trial = 0; trial < 5; ++trial) {
      const Eigen::VectorXd x = gaussian_matrix(static_cast<Eigen::Index>(phi.input_size()), 1, rng);
      const Eigen::VectorXd y = gaussian_matrix(static_cast<Eigen::Index>(phi.output_size()), 1, rng);
      const double lhs = phi.apply(std::span<const double>(x.data(), phi.input_size())).dot(y);
      const double rhs = x.dot(phi.apply_adjoint(std::span<const double>(y.data(), phi.output_size())));
      o.worst = std::max(o.worst, std::abs(lhs - rhs) / (x.norm() * y.norm()));
    }
  }
  return o;
}

Outcome reconstruction_gradient(std::mt19937_64& rng) {
  Outcome o{0.0, 1e-5};
  const OperatorPair pair{AnalysisOperator(random_operator_rows(16, 9, rng()), "U"),
                          AnalysisOperator(random_operator_rows(16, 9, rng()), "V"), LearningParams{}};
  const int w = 12, hgt = 10;
  const ModalImage guide = ModalImage::from_vector(w, hgt, gaussian_matrix(w * hgt, 1, rng));
  const MeasurementOperator phi = MeasurementOperator::blur_downsample(w, hgt, 2);
  const Eigen::VectorXd y = gaussian_matrix(static_cast<Eigen::Index>(phi.output_size()), 1, rng);
  const GlobalAnalysis analysis(pair.omega_v, w, hgt);
  const Eigen::VectorXd c = precompute_guide_coeffs(pair, guide);
  const GuidedObjective f(analysis, c, phi, y, 3.0, 0.7);
  const Eigen::VectorXd s = gaussian_matrix(w * hgt, 1, rng);
  Eigen::VectorXd g;
  f.value_and_gradient(s, g);
  Eigen::VectorXd fd(s.size());
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    Eigen::VectorXd sp = s, sm = s;
    sp[i] += h;
    sm[i] -= h;
    fd[i] = (f.value(sp) - f.value(sm)) / (2 * h);
  }
  o.worst = (fd - g).norm() / g.norm();
  return o;
}

Eigen::Matrix3d random_algebra(GroupKind group, std::mt19937_64& rng, double linear_scale) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) m(i, j) = linear_scale * standard_normal(rng);
    m(i, 2) = standard_normal(rng);
  }
  return project_algebra(group, m);
}

Outcome exp_invariants(std::mt19937_64& rng) {
  Outcome o{0.0, 0.5};  // counts violations
  for (GroupKind group : {GroupKind::SO2, GroupKind::SE2, GroupKind::SA2, GroupKind::A2}) {
    for (int trial = 0; trial < 100; ++trial) {
      const GroupElement e = exp_map(AlgebraElement(random_algebra(group, rng, 1.0), group));
      if (!in_group(e.matrix(), group, 1e-9)) o.worst += 1.0;
    }
  }
  return o;
}

Outcome projection_idempotent(std::mt19937_64& rng) {
  Outcome o{0.0, 1e-14};
  for (GroupKind group : {GroupKind::SO2, GroupKind::SE2, GroupKind::SA2, GroupKind::A2}) {
    for (int trial = 0; trial < 100; ++trial) {
      Eigen::Matrix3d x;
      for (int i = 0; i < 9; ++i) x(i) = standard_normal(rng);
      const Eigen::Matrix3d p = project_algebra(group, x);
      o.worst = std::max(o.worst, (project_algebra(group, p) - p).cwiseAbs().maxCoeff());
      if (!in_algebra(p, group, 1e-12)) o.worst = 1.0;
    }
  }
  return o;
}

Outcome registration_gradient_fd(std::mt19937_64& rng) {
  Outcome o{0.0, 1e-3};
  const int size = 64;
  const SyntheticScene scene = generate_scene(rng(), size, ModalityPair::intensity_depth);
  const ModalImage moving = generate_deregistered(scene.seed, size, scene.pair, 1.5, -1.0, 2.0);
  const OperatorPair pair{AnalysisOperator(random_operator_rows(16, 9, rng()), "U"),
                          AnalysisOperator(random_operator_rows(16, 9, rng()), "V"), LearningParams{}};
  const Region region{12, 12, size - 24, size - 24};
  for (GroupKind group : {GroupKind::SO2, GroupKind::SE2, GroupKind::SA2, GroupKind::A2}) {
    const RegistrationObjective f(scene.first, moving, pair, region, region.center(), 400.0, group,
                                  MetricWeights::balanced(region.diagonal()));
    const GroupElement tau = exp_map(AlgebraElement(random_algebra(group, rng, 0.02), group));
    const Eigen::Matrix3d r = f.euclidean_gradient(tau);
    for (int trial = 0; trial < 3; ++trial) {
      const Eigen::Matrix3d h = random_algebra(group, rng, 0.02);
      const double step = 1e-4;
      const double fp = f.value(exp_map(AlgebraElement(step * h, group)) * tau);
      const double fm = f.value(exp_map(AlgebraElement(-step * h, group)) * tau);
      const double fd = (fp - fm) / (2 * step);
      const double an = (r.array() * h.array()).sum();
      o.worst = std::max(o.worst, std::abs(fd - an) / std::max(std::abs(an), 1e-8));
    }
  }
  return o;
}

Outcome io_round_trip(std::mt19937_64& rng) {
  Outcome o{0.0, 0.5};
  // Float-representable values must survive the float container exactly.
  Eigen::VectorXd values = gaussian_matrix(35, 1, rng);
  for (double& v : values) v = static_cast<float>(v);
  const ModalImage img = ModalImage::from_vector(7, 5, values);
  std::stringstream fs;
  write_image(fs, img, ImageFormat::floatmap);
  const ModalImage back = read_image(fs);
  if (!back.same_shape(img) || back.vector() != img.vector()) o.worst += 1.0;

  ModalImage unit = img.rescaled_unit();
  std::stringstream gs;
  write_image(gs, unit, ImageFormat::graymap);
  const ModalImage quantized = read_image(gs);
  if ((quantized.vector() - unit.vector()).cwiseAbs().maxCoeff() > 1.0 / 510 + 1e-12) o.worst += 1.0;

  const OperatorPair pair{AnalysisOperator(random_operator_rows(16, 9, rng()), "intensity"),
                          AnalysisOperator(random_operator_rows(16, 9, rng()), "depth"),
                          LearningParams::intensity_depth()};
  std::stringstream ps;
  write_operator_pair(ps, pair);
  const OperatorPair pb = read_operator_pair(ps);
  if (pb.omega_u.rows() != pair.omega_u.rows() || pb.omega_v.rows() != pair.omega_v.rows() ||
      pb.omega_v.modality_tag() != "depth" || !(pb.params == pair.params)) {
    o.worst += 1.0;
  }

  const GroupElement tau = rigid_transform(uniform(rng, -9, 9), uniform(rng, -9, 9), uniform(rng, -30, 30));
  if (parse_transform(format_transform(tau)).matrix() != tau.matrix()) o.worst += 1.0;
  return o;
}

Outcome config_round_trip(std::mt19937_64& rng) {
  Outcome o{0.0, 0.5};
  ExperimentConfig cfg;
  cfg.learn.seed = rng();
  cfg.learn.params = LearningParams::intensity_nir();
  cfg.reconstruct.factor = 3;
  cfg.reconstruct.nu = 123.5;
  cfg.registration.group = GroupKind::SA2;
  const std::string text = cfg.to_file().serialize();
  const ConfigFile reparsed = ConfigFile::parse(text);
  if (!(ExperimentConfig::from_file(reparsed) == cfg)) o.worst += 1.0;
  if (reparsed.serialize() != text) o.worst += 1.0;
  return o;
}

Outcome scene_edges(std::mt19937_64& rng) {
  // Reported as 1 − worst Jaccard so that lower is better.
  Outcome o{0.0, 0.2};
  for (int trial = 0; trial < 3; ++trial) {
    const SyntheticScene s = generate_scene(rng(), 64, ModalityPair::intensity_depth);
    const double j = jaccard_index(edge_map(s.first, 0.02), edge_map(s.second, 0.02));
    o.worst = std::max(o.worst, 1.0 - j);
  }
  return o;
}

Outcome scene_determinism(std::mt19937_64& rng) {
  Outcome o{0.0, 0.5};
  const std::uint64_t seed = rng();
  for (ModalityPair p : {ModalityPair::intensity_depth, ModalityPair::intensity_nir}) {
    const SyntheticScene a = generate_scene(seed, 48, p);
    const SyntheticScene b = generate_scene(seed, 48, p);
    if (a.first.vector() != b.first.vector() || a.second.vector() != b.second.vector()) o.worst += 1.0;
  }
  return o;
}

struct Entry {
  const char* name;
  Check check;
};

constexpr Entry kChecks[] = {
    {"manifold.geodesic_constraints", geodesic_constraints},
    {"manifold.transport_isometry", transport_isometry},
    {"bimodal_model.learning_gradient", learning_gradient},
    {"global_operator.adjoint", global_adjoint},
    {"reconstruction.measurement_adjoint", measurement_adjoint},
    {"reconstruction.objective_gradient", reconstruction_gradient},
    {"lie_group.exp_invariants", exp_invariants},
    {"lie_group.projection_idempotent", projection_idempotent},
    {"registration.gradient", registration_gradient_fd},
    {"io.round_trip", io_round_trip},
    {"config.round_trip", config_round_trip},
    {"synthetic.edge_overlap", scene_edges},
    {"synthetic.determinism", scene_determinism},
};

}  // namespace

std::vector<std::string> selftest_names() {
  std::vector<std::string> names;
  for (const Entry& e : kChecks) names.emplace_back(e.name);
  return names;
}

std::vector<SelfTestResult> run_selftest(std::uint64_t seed, const std::string& filter,
                                         const std::function<void(const SelfTestResult&)>& progress) {
  std::vector<SelfTestResult> results;
  for (std::size_t i = 0; i < std::size(kChecks); ++i) {
    const Entry& e = kChecks[i];
    if (!std::string_view(e.name).starts_with(filter)) continue;
    // Each check gets its own stream so filtering does not change its inputs.
    std::mt19937_64 rng(seed + 0x9E3779B97F4A7C15ULL * (i + 1));
    SelfTestResult r;
    r.name = e.name;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const Outcome o = e.check(rng);
      r.passed = o.passed();
      std::ostringstream detail;
      detail << "worst " << o.worst << " (limit " << o.limit << ")";
      r.detail = detail.str();
    } catch (const std::exception& ex) {
      r.passed = false;
      r.detail = ex.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (progress) progress(r);
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace cosparse
