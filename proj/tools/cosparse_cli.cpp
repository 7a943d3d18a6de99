#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>

#include "cosparse/config.hpp"
#include "cosparse/errors.hpp"
#include "cosparse/experiment.hpp"
#include "cosparse/io.hpp"
#include "cosparse/selftest.hpp"
#include "table.hpp"

namespace fs = std::filesystem;
using namespace cosparse;
using cli::fixed;
using cli::Table;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr int kExitNumerical = 4;
constexpr int kExitTestFailure = 1;

std::vector<double> parse_numbers(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < item.size() && item[used] == ' ') ++used;
    if (item.empty() || used != item.size()) throw InvalidArgument(std::string(what) + ": bad number '" + item + "'");
    out.push_back(v);
  }
  return out;
}

struct Dereg {
  double tx = 0.0, ty = 0.0, theta = 0.0;
};

Dereg parse_dereg(const std::string& text) {
  const auto v = parse_numbers(text, "--dereg");
  if (v.size() != 3) throw InvalidArgument("--dereg expects \"tx,ty,theta_deg\"");
  return {v[0], v[1], v[2]};
}

// The config file supplies defaults that explicit flags override, so it has to
// be read before the options are bound.
std::optional<fs::path> find_config(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string_view a = argv[i];
    if (a == "--config" && i + 1 < argc) return fs::path(argv[i + 1]);
    if (a.starts_with("--config=")) return fs::path(std::string(a.substr(9)));
  }
  return std::nullopt;
}

std::string status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iterations: return "max_iterations";
    case SolveStatus::stalled: return "stalled";
  }
  return "?";
}

fs::path with_suffix(const fs::path& prefix, const std::string& suffix, ImageFormat format) {
  return fs::path(prefix.string() + suffix + (format == ImageFormat::graymap ? ".pgm" : ".pfm"));
}

void write_checked(const fs::path& path, const ModalImage& image) {
  write_image(path, image);
  std::cout << "wrote " << path.string() << '\n';
}

OperatorPair operators_or_learn(const std::string& path, const LearnSettings& learn) {
  if (!path.empty()) return read_operator_pair(fs::path(path));
  std::cout << "no --operators given; learning a pair on synthetic scenes (seed " << learn.seed << ")\n";
  return learn_operators(learn).pair;
}

struct Options {
  ExperimentConfig cfg;
  std::string config_path;

  // learn
  std::string preset;
  std::string learn_pair_name;
  std::vector<std::string> images_u, images_v;
  std::string output;

  // synth
  std::uint64_t synth_seed = 1;
  int synth_size = 64;
  std::string synth_pair = "intensity_depth";
  std::string dereg;
  int synth_factor = 0;
  std::string format = "pfm";

  // reconstruct
  std::string operators, guide, low, truth, nearest_output, lambda_schedule;
  bool random_init = false;
  double delta = 1.0;

  // register
  std::string fixed_image, moving_image, group, register_pair = "intensity_depth";
  std::uint64_t scene_seed = 1;
  bool sweep = false;
  int jobs = 1;
  double sweep_range = 10.0, sweep_step = 2.0;
  bool verbose = false;
  std::string csv;

  // evaluate
  std::string result, baseline, transform;
  double scale = kEightBitScale;

  // selftest
  std::uint64_t selftest_seed = 1;
  std::string filter;
};

int run_learn(Options& o) {
  LearnSettings& s = o.cfg.learn;
  if (!o.preset.empty()) {
    if (o.preset == "small_patch") s.params = LearningParams::small_patch();
    else if (o.preset == "intensity_depth") s.params = LearningParams::intensity_depth();
    else if (o.preset == "intensity_nir") s.params = LearningParams::intensity_nir();
  }
  if (!o.learn_pair_name.empty()) s.synthetic_pair = parse_modality_pair(o.learn_pair_name);
  if (!o.images_u.empty() || !o.images_v.empty()) {
    s.images_u.assign(o.images_u.begin(), o.images_u.end());
    s.images_v.assign(o.images_v.begin(), o.images_v.end());
  }
  o.cfg.validate();
  const LearningResult r = learn_operators(s, [&](const Eigen::MatrixXd&, const Eigen::MatrixXd&, double value, int it) {
    if (o.verbose && it % 25 == 0) std::cout << "iteration " << it << "  L = " << fixed(value, 6) << '\n';
  });
  write_operator_pair(fs::path(o.output), r.pair);

  Table t({"quantity", "value"});
  t.add({"k x n", std::to_string(r.pair.omega_u.row_count()) + " x " + std::to_string(r.pair.omega_u.patch_size())});
  t.add({"initial L", fixed(r.initial_value, 6)});
  t.add({"final L", fixed(r.final_value, 6)});
  t.add({"iterations", std::to_string(r.report.iterations)});
  t.add({"status", status_name(r.report.status)});
  t.add({"constraint violation",
         fixed(std::max(constraint_violation(r.pair.omega_u.rows().transpose()),
                        constraint_violation(r.pair.omega_v.rows().transpose())), 16)});
  t.print(std::cout);
  if (!o.csv.empty()) t.write_csv(fs::path(o.csv));
  std::cout << "wrote " << o.output << '\n';
  return 0;
}

int run_synth(const Options& o) {
  const ModalityPair pair = parse_modality_pair(o.synth_pair);
  const ImageFormat format = o.format == "pgm" ? ImageFormat::graymap : ImageFormat::floatmap;
  const SyntheticScene scene = generate_scene(o.synth_seed, o.synth_size, pair);
  const std::string second = pair == ModalityPair::intensity_depth ? "_depth" : "_nir";
  write_checked(with_suffix(o.output, "_intensity", format), scene.first);
  write_checked(with_suffix(o.output, second, format), scene.second);
  if (!o.dereg.empty()) {
    const Dereg d = parse_dereg(o.dereg);
    write_checked(with_suffix(o.output, second + "_moved", format),
                  generate_deregistered(o.synth_seed, o.synth_size, pair, d.tx, d.ty, d.theta));
  }
  if (o.synth_factor > 0) {
    write_checked(with_suffix(o.output, second + "_low", ImageFormat::floatmap),
                  simulate_low_resolution(scene.second, o.synth_factor));
  }
  return 0;
}

Table metrics_table(const std::vector<std::pair<std::string, ReconstructionMetrics>>& rows, double delta) {
  Table t({"image", "rmse", "bad_pixel_pct(delta=" + fixed(delta, 2) + ")"});
  for (const auto& [name, m] : rows) t.add({name, fixed(m.rmse, 4), fixed(m.bad_pixel_pct, 3)});
  return t;
}

int run_reconstruct(Options& o) {
  ReconstructSettings& s = o.cfg.reconstruct;
  if (!o.lambda_schedule.empty()) s.lambda_schedule = parse_numbers(o.lambda_schedule, "--lambda-schedule");
  if (o.random_init) s.nearest_init = false;
  o.cfg.validate();
  const OperatorPair pair = read_operator_pair(fs::path(o.operators));
  const ModalImage guide = read_image(fs::path(o.guide));
  const ModalImage low = read_image(fs::path(o.low));
  const SuperResolutionRun run = super_resolve(pair, guide, low, s, [&](std::size_t stage, int it, double value) {
    if (o.verbose && it % 50 == 0) std::cout << "stage " << stage << " iteration " << it << "  f = " << value << '\n';
  });

  Table stages({"stage", "lambda", "iterations", "status", "final_value"});
  for (std::size_t i = 0; i < run.stages.size(); ++i) {
    const StageReport& st = run.stages[i];
    stages.add({std::to_string(i), fixed(st.lambda, 3), std::to_string(st.iterations), status_name(st.status),
                fixed(st.final_value, 4)});
  }
  stages.print(std::cout);
  write_checked(fs::path(o.output), run.result);
  if (!o.nearest_output.empty()) write_checked(fs::path(o.nearest_output), run.nearest);

  if (!o.truth.empty()) {
    const ModalImage truth = read_image(fs::path(o.truth));
    const Table t = metrics_table({{"reconstruction", evaluate_metrics(run.result, truth, o.delta, kEightBitScale)},
                                   {"nearest", evaluate_metrics(run.nearest, truth, o.delta, kEightBitScale)}},
                                  o.delta);
    std::cout << '\n';
    t.print(std::cout);
    if (!o.csv.empty()) t.write_csv(fs::path(o.csv));
  }
  return 0;
}

void add_residual_row(Table& t, const std::string& label, const RegistrationResidual& r) {
  t.add({label, fixed(r.ex, 4), fixed(r.ey, 4), fixed(r.etheta, 4), fixed(r.combined(), 4)});
}

int run_register(Options& o) {
  RegisterSettings& s = o.cfg.registration;
  if (!o.group.empty()) s.group = parse_group(o.group);
  o.cfg.validate();
  const ModalityPair modalities = parse_modality_pair(o.register_pair);
  if (o.fixed_image.empty() != o.moving_image.empty()) {
    throw InvalidArgument("--fixed and --moving must be given together");
  }
  LearnSettings learn = o.cfg.learn;
  learn.synthetic_pair = modalities;
  const OperatorPair pair = operators_or_learn(o.operators, learn);

  if (o.sweep) {
    if (!o.fixed_image.empty()) throw InvalidArgument("--sweep runs on synthetic scenes only");
    const auto cells = registration_sweep(pair, o.scene_seed, modalities, s, o.jobs, o.sweep_range, o.sweep_step);
    Table t({"translation", "theta_deg", "eps_x", "eps_y", "eps_theta", "eps"});
    int good = 0;
    for (const SweepCell& c : cells) {
      if (c.failed) {
        t.add({fixed(c.translation, 2), fixed(c.theta_deg, 2), "-", "-", "-", "failed"});
        std::cerr << "cell (" << c.translation << ", " << c.theta_deg << "): " << c.error << '\n';
        continue;
      }
      good += c.residual.combined() < 1.0 ? 1 : 0;
      t.add({fixed(c.translation, 2), fixed(c.theta_deg, 2), fixed(c.residual.ex, 4), fixed(c.residual.ey, 4),
             fixed(c.residual.etheta, 4), fixed(c.residual.combined(), 4)});
    }
    t.print(std::cout);
    if (!o.csv.empty()) t.write_csv(fs::path(o.csv));
    std::cout << "\ncells with eps < 1: " << good << " / " << cells.size() << " ("
              << fixed(100.0 * good / static_cast<double>(cells.size()), 1) << "%)\n";
    return 0;
  }

  const RegistrationObserver observer = [&](int level, int it, double value, const GroupElement&) {
    if (o.verbose && it % 10 == 0) std::cout << "level " << level << " iteration " << it << "  F = " << value << '\n';
  };
  std::optional<Dereg> dereg;
  if (!o.dereg.empty()) dereg = parse_dereg(o.dereg);

  RegistrationResult result;
  if (o.fixed_image.empty()) {
    const Dereg d = dereg.value_or(Dereg{});
    result = register_synthetic(pair, o.scene_seed, modalities, d.tx, d.ty, d.theta, s, observer).result;
  } else {
    const ModalImage fixed_img = read_image(fs::path(o.fixed_image));
    const ModalImage moving_img = read_image(fs::path(o.moving_image));
    result = register_images(make_registration_problem(pair, fixed_img, moving_img, s), registration_options(s),
                             observer);
  }

  Table levels({"level", "iterations", "status", "initial_F", "final_F"});
  for (const LevelReport& l : result.levels) {
    levels.add({std::to_string(l.level), std::to_string(l.iterations), status_name(l.status),
                fixed(l.initial_value, 6), fixed(l.final_value, 6)});
  }
  levels.print(std::cout);
  std::cout << "\ntau: " << format_transform(result.tau) << '\n';
  if (!o.output.empty()) {
    std::ofstream out(o.output);
    if (!out) throw InvalidArgument("cannot write " + o.output);
    out << format_transform(result.tau) << '\n';
    std::cout << "wrote " << o.output << '\n';
  }
  if (dereg) {
    const RegistrationResidual r = registration_residual(result.tau, dereg->tx, dereg->ty, dereg->theta);
    Table t({"deregistration", "eps_x", "eps_y", "eps_theta", "eps"});
    add_residual_row(t, "(" + fixed(dereg->tx, 2) + ", " + fixed(dereg->ty, 2) + ", " + fixed(dereg->theta, 2) + ")", r);
    std::cout << '\n';
    t.print(std::cout);
    if (!o.csv.empty()) t.write_csv(fs::path(o.csv));
  }
  return 0;
}

GroupElement read_transform_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MalformedFile("cannot open " + path.string(), 0);
  std::string line;
  std::getline(in, line);
  return parse_transform(line);
}

int run_evaluate(const Options& o) {
  if (o.result.empty() == o.transform.empty()) {
    throw InvalidArgument("evaluate needs exactly one of --result (image) or --transform");
  }
  if (!o.transform.empty()) {
    if (o.dereg.empty()) throw InvalidArgument("--transform needs --dereg");
    const Dereg d = parse_dereg(o.dereg);
    const RegistrationResidual r = registration_residual(read_transform_file(o.transform), d.tx, d.ty, d.theta);
    Table t({"transform", "eps_x", "eps_y", "eps_theta", "eps"});
    add_residual_row(t, fs::path(o.transform).filename().string(), r);
    t.print(std::cout);
    if (!o.csv.empty()) t.write_csv(fs::path(o.csv));
    return 0;
  }
  if (o.truth.empty()) throw InvalidArgument("--result needs --truth");
  if (!(o.delta >= 0.0) || !(o.scale > 0.0)) throw InvalidArgument("--delta must be ≥ 0 and --scale > 0");
  const ModalImage truth = read_image(fs::path(o.truth));
  std::vector<std::pair<std::string, ReconstructionMetrics>> rows;
  rows.emplace_back(fs::path(o.result).filename().string(),
                    evaluate_metrics(read_image(fs::path(o.result)), truth, o.delta, o.scale));
  if (!o.baseline.empty()) {
    rows.emplace_back(fs::path(o.baseline).filename().string(),
                      evaluate_metrics(read_image(fs::path(o.baseline)), truth, o.delta, o.scale));
  }
  const Table t = metrics_table(rows, o.delta);
  t.print(std::cout);
  if (!o.csv.empty()) t.write_csv(fs::path(o.csv));
  return 0;
}

int run_selftest_command(const Options& o) {
  int failed = 0;
  const auto results = run_selftest(o.selftest_seed, o.filter, [&](const SelfTestResult& r) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << "  " << r.detail << "  (" << fixed(r.seconds, 3) << " s)"
              << std::endl;
    failed += r.passed ? 0 : 1;
  });
  if (results.empty()) throw InvalidArgument("no self-test matches '" + o.filter + "'");
  std::cout << results.size() - static_cast<std::size_t>(failed) << " / " << results.size() << " checks passed\n";
  return failed == 0 ? 0 : kExitTestFailure;
}

int exit_code(ErrorClass c) {
  switch (c) {
    case ErrorClass::validation: return kExitValidation;
    case ErrorClass::io: return kExitValidation;
    case ErrorClass::numerical: return kExitNumerical;
  }
  return kExitValidation;
}

const char* class_name(ErrorClass c) {
  switch (c) {
    case ErrorClass::validation: return "validation error";
    case ErrorClass::io: return "input error";
    case ErrorClass::numerical: return "numerical failure";
  }
  return "error";
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Bimodal co-sparse analysis: operator learning, guided super-resolution and registration"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "cosparse 0.1.0");

  try {
    if (const auto path = find_config(argc, argv)) o.cfg = load_experiment_config(*path);
  } catch (const Error& e) {
    std::cerr << "cosparse: " << class_name(e.error_class()) << ": " << e.what() << '\n';
    return exit_code(e.error_class());
  }

  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", o.config_path, "Experiment config file (flags override it)")->check(CLI::ExistingFile);
  };
  auto add_csv = [&](CLI::App* cmd) {
    cmd->add_option("--csv", o.csv, "Also write the result table as comma-separated rows");
  };

  auto* learn = app.add_subcommand("learn", "Learn an operator pair from aligned image pairs");
  add_config(learn);
  learn->add_option("--seed", o.cfg.learn.seed, "Seed for scenes, sampling and initialization")->capture_default_str();
  learn->add_option("--images-u", o.images_u, "First-modality training images (comma separated)")->delimiter(',');
  learn->add_option("--images-v", o.images_v, "Second-modality training images, same order")->delimiter(',');
  learn->add_option("--pair", o.learn_pair_name, "Synthetic modality pair: intensity_depth or intensity_nir")
      ->check(CLI::IsMember({"intensity_depth", "intensity_nir"}));
  learn->add_option("--scenes", o.cfg.learn.synthetic_scenes, "Synthetic training scenes")->capture_default_str();
  learn->add_option("--size", o.cfg.learn.synthetic_size, "Synthetic scene size")->capture_default_str();
  learn->add_option("--patch-side", o.cfg.learn.patch_side, "Patch side length")->capture_default_str();
  learn->add_option("--k", o.cfg.learn.k, "Operator rows (0 selects 2n)")->capture_default_str();
  learn->add_option("--samples", o.cfg.learn.samples, "Training patch pairs")->capture_default_str();
  learn->add_option("--iterations", o.cfg.learn.max_iterations, "CG iterations")->capture_default_str();
  learn->add_option("--preset", o.preset, "Learning weights")
      ->check(CLI::IsMember({"small_patch", "intensity_depth", "intensity_nir"}));
  learn->add_option("--output", o.output, "Operator pair file to write")->required();
  learn->add_flag("--verbose", o.verbose, "Print the objective during learning");
  add_csv(learn);

  auto* synth = app.add_subcommand("synth", "Render a synthetic bimodal scene");
  synth->add_option("--seed", o.synth_seed, "Scene seed")->capture_default_str();
  synth->add_option("--size", o.synth_size, "Scene side length in pixels (≥ 32)")->capture_default_str();
  synth->add_option("--pair", o.synth_pair, "intensity_depth or intensity_nir")
      ->check(CLI::IsMember({"intensity_depth", "intensity_nir"}))
      ->capture_default_str();
  synth->add_option("--dereg", o.dereg, "Also write the second modality moved by \"tx,ty,theta_deg\"");
  synth->add_option("--factor", o.synth_factor, "Also write the blurred, decimated second modality");
  synth->add_option("--format", o.format, "Image format: pfm (float) or pgm (8-bit)")
      ->check(CLI::IsMember({"pfm", "pgm"}))
      ->capture_default_str();
  synth->add_option("--output", o.output, "Output file prefix")->required();

  auto* rec = app.add_subcommand("reconstruct", "Guided super-resolution of a low-resolution image");
  add_config(rec);
  rec->add_option("--operators", o.operators, "Operator pair file")->required()->check(CLI::ExistingFile);
  rec->add_option("--guide", o.guide, "High-resolution guide image (first modality)")->required()->check(CLI::ExistingFile);
  rec->add_option("--low", o.low, "Low-resolution measurement of the second modality")->required()->check(CLI::ExistingFile);
  rec->add_option("--factor", o.cfg.reconstruct.factor, "Upsampling factor d")->capture_default_str();
  rec->add_option("--lambda-schedule", o.lambda_schedule, "Continuation schedule, e.g. \"1000,100,10,1\"");
  rec->add_option("--iterations", o.cfg.reconstruct.iterations_per_stage, "CG iterations per stage")->capture_default_str();
  rec->add_option("--nu", o.cfg.reconstruct.nu, "Coupling weight (default: the pair's learning value)");
  rec->add_option("--seed", o.cfg.reconstruct.seed, "Seed for --random-init")->capture_default_str();
  rec->add_flag("--random-init", o.random_init, "Start from uniform noise instead of the upsampled input");
  rec->add_option("--truth", o.truth, "Ground truth for the metric table")->check(CLI::ExistingFile);
  rec->add_option("--delta", o.delta, "Bad-pixel threshold on the 8-bit scale")->capture_default_str();
  rec->add_option("--nearest-output", o.nearest_output, "Also write the nearest-neighbor baseline");
  rec->add_option("--output", o.output, "Reconstructed image file")->required();
  rec->add_flag("--verbose", o.verbose, "Print the objective during each stage");
  add_csv(rec);

  auto* reg = app.add_subcommand("register", "Register a second-modality image onto the first");
  add_config(reg);
  reg->add_option("--operators", o.operators, "Operator pair file (default: learn one on synthetic scenes)")
      ->check(CLI::ExistingFile);
  reg->add_option("--fixed", o.fixed_image, "First-modality image")->check(CLI::ExistingFile);
  reg->add_option("--moving", o.moving_image, "Second-modality image to align")->check(CLI::ExistingFile);
  reg->add_option("--group", o.group, "Transformation group: SO2, SE2, SA2 or A2");
  reg->add_option("--levels", o.cfg.registration.levels, "Pyramid levels")->capture_default_str();
  reg->add_option("--border", o.cfg.registration.border, "Pixels excluded on every side")->capture_default_str();
  reg->add_option("--iterations", o.cfg.registration.max_iterations, "Iterations per level")->capture_default_str();
  reg->add_option("--nu", o.cfg.registration.nu, "Coupling weight (default: the pair's learning value)");
  reg->add_option("--dereg", o.dereg, "Applied deregistration \"tx,ty,theta_deg\"; prints residuals");
  reg->add_option("--seed", o.scene_seed, "Synthetic scene seed")->capture_default_str();
  reg->add_option("--size", o.cfg.registration.synthetic_size, "Synthetic scene size")->capture_default_str();
  reg->add_option("--pair", o.register_pair, "Synthetic modality pair")
      ->check(CLI::IsMember({"intensity_depth", "intensity_nir"}))
      ->capture_default_str();
  reg->add_flag("--sweep", o.sweep, "Run the translation × rotation grid instead of one case");
  reg->add_option("--sweep-range", o.sweep_range, "Grid half-width (pixels and degrees)")->capture_default_str();
  reg->add_option("--sweep-step", o.sweep_step, "Grid step")->capture_default_str();
  reg->add_option("--jobs", o.jobs, "Worker threads for --sweep")->check(CLI::PositiveNumber)->capture_default_str();
  reg->add_option("--output", o.output, "Write the recovered transform");
  reg->add_flag("--verbose", o.verbose, "Print F during descent");
  add_csv(reg);

  auto* eval = app.add_subcommand("evaluate", "Score a reconstruction or a recovered transform");
  eval->add_option("--result", o.result, "Reconstructed image")->check(CLI::ExistingFile);
  eval->add_option("--baseline", o.baseline, "Optional second image scored against the same truth")
      ->check(CLI::ExistingFile);
  eval->add_option("--truth", o.truth, "Ground-truth image")->check(CLI::ExistingFile);
  eval->add_option("--delta", o.delta, "Bad-pixel threshold after scaling")->capture_default_str();
  eval->add_option("--scale", o.scale, "Value scale applied before scoring")->capture_default_str();
  eval->add_option("--transform", o.transform, "Transform file written by register")->check(CLI::ExistingFile);
  eval->add_option("--dereg", o.dereg, "Applied deregistration \"tx,ty,theta_deg\"");
  add_csv(eval);

  auto* self = app.add_subcommand("selftest", "Run the built-in invariant checks");
  self->add_option("--seed", o.selftest_seed, "Seed for the random instances")->capture_default_str();
  self->add_option("--filter", o.filter, "Only run checks whose name starts with this prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*learn) return run_learn(o);
    if (*synth) return run_synth(o);
    if (*rec) return run_reconstruct(o);
    if (*reg) return run_register(o);
    if (*eval) return run_evaluate(o);
    if (*self) return run_selftest_command(o);
  } catch (const Error& e) {
    std::cerr << "cosparse: " << class_name(e.error_class()) << ": " << e.what() << '\n';
    return exit_code(e.error_class());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "cosparse: input error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitUsage;
}
