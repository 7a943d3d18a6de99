#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cosparse/bimodal_model.hpp"
#include "cosparse/lie_group.hpp"
#include "cosparse/synthetic.hpp"

namespace cosparse {

/// Versioned key-value text file with one section per subcommand:
///
///   cosparse-config 1
///   [learn]
///   k = 16
///
/// Blank lines and lines starting with '#' are ignored. Keys and sections are
/// kept sorted, so serialize(parse(text)) is canonical.
class ConfigFile {
 public:
  static constexpr int kVersion = 1;

  static ConfigFile parse(const std::string& text);
  static ConfigFile load(const std::filesystem::path& path);
  std::string serialize() const;

  bool has(const std::string& section, const std::string& key) const;
  std::optional<std::string> get(const std::string& section, const std::string& key) const;
  void set(const std::string& section, const std::string& key, std::string value);
  const std::map<std::string, std::map<std::string, std::string>>& sections() const noexcept {
    return sections_;
  }

  friend bool operator==(const ConfigFile&, const ConfigFile&) = default;

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

struct LearnSettings {
  std::vector<std::filesystem::path> images_u;  // empty: use synthetic scenes
  std::vector<std::filesystem::path> images_v;
  ModalityPair synthetic_pair = ModalityPair::intensity_depth;
  int synthetic_scenes = 4;
  int synthetic_size = 96;
  int patch_side = 3;
  int k = 16;  // 0 selects 2n
  std::size_t samples = 1000;
  double std_threshold = 0.05;
  LearningParams params = LearningParams::small_patch();
  int max_iterations = 300;
  double tolerance = 1e-6;
  std::uint64_t seed = 1;

  friend bool operator==(const LearnSettings&, const LearnSettings&) = default;
};

struct ReconstructSettings {
  int factor = 2;
  std::vector<double> lambda_schedule = {1000.0, 100.0, 10.0, 1.0};
  int iterations_per_stage = 500;
  std::optional<double> nu;
  std::uint64_t seed = 1;
  bool nearest_init = true;  // start from the upsampled measurements instead of noise

  friend bool operator==(const ReconstructSettings&, const ReconstructSettings&) = default;
};

struct RegisterSettings {
  GroupKind group = GroupKind::SE2;
  int levels = 4;
  int border = 24;  // region = image minus this many pixels on every side
  int max_iterations = 30;  // per pyramid level
  double tolerance = 1e-6;
  std::optional<double> nu;
  double smoothing_sigma = 1.0;
  int synthetic_size = 256;  // scene size when no images are given

  friend bool operator==(const RegisterSettings&, const RegisterSettings&) = default;
};

struct ExperimentConfig {
  LearnSettings learn;
  ReconstructSettings reconstruct;
  RegisterSettings registration;

  /// Validates every numeric constraint and that all referenced paths exist.
  void validate() const;
  /// Unknown keys or malformed values throw ConfigError.
  static ExperimentConfig from_file(const ConfigFile& file);
  ConfigFile to_file() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Reads, parses and validates a configuration file.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

}  // namespace cosparse
