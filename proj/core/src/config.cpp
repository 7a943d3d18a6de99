#include "cosparse/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iterator>
#include <sstream>
#include <string>
#include <type_traits>

#include "cosparse/errors.hpp"
#include "cosparse/reconstruction.hpp"

namespace cosparse {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) return false;
  }
  return true;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

double parse_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' expects a number, got '" + text + "'");
  }
  if (used != text.size() || !std::isfinite(v)) throw ConfigError("'" + key + "' expects a finite number");
  return v;
}

long long parse_integer(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' expects an integer, got '" + text + "'");
  }
  if (used != text.size()) throw ConfigError("'" + key + "' expects an integer, got '" + text + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  throw ConfigError("'" + key + "' expects true or false");
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_double(v[i]);
  return out;
}

std::string join_paths(const std::vector<std::filesystem::path>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i].string();
  return out;
}

// Binds config keys of one section to typed fields.
class SectionBinder {
 public:
  using Reader = std::function<void(const std::string&)>;
  using Writer = std::function<std::string()>;

  void bind(const std::string& key, Reader read, Writer write) {
    readers_[key] = std::move(read);
    writers_[key] = std::move(write);
  }
  void read(const std::string& section, const std::map<std::string, std::string>& values) const {
    for (const auto& [key, value] : values) {
      const auto it = readers_.find(key);
      if (it == readers_.end()) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
      it->second(value);
    }
  }
  void write(const std::string& section, ConfigFile& file) const {
    for (const auto& [key, writer] : writers_) {
      std::string v = writer();
      if (!v.empty()) file.set(section, key, std::move(v));
    }
  }

 private:
  std::map<std::string, Reader> readers_;
  std::map<std::string, Writer> writers_;
};

template <typename Int>
void bind_int(SectionBinder& b, const std::string& key, Int& field) {
  b.bind(key,
         [&field, key](const std::string& v) {
           if constexpr (std::is_unsigned_v<Int>) {
             if (v.empty() || !std::isdigit(static_cast<unsigned char>(v[0]))) {
               throw ConfigError("'" + key + "' expects a non-negative integer, got '" + v + "'");
             }
             std::size_t used = 0;
             try {
               field = static_cast<Int>(std::stoull(v, &used));
             } catch (const std::exception&) {
               used = 0;
             }
             if (used != v.size()) throw ConfigError("'" + key + "' expects a non-negative integer, got '" + v + "'");
           } else {
             field = static_cast<Int>(parse_integer(key, v));
           }
         },
         [&field] { return std::to_string(field); });
}

void bind_double(SectionBinder& b, const std::string& key, double& field) {
  b.bind(key, [&field, key](const std::string& v) { field = parse_double(key, v); },
         [&field] { return format_double(field); });
}

void bind_optional(SectionBinder& b, const std::string& key, std::optional<double>& field) {
  b.bind(key, [&field, key](const std::string& v) { field = parse_double(key, v); },
         [&field] { return field ? format_double(*field) : std::string(); });
}

template <typename Config>
void bind_all(Config& cfg, SectionBinder& learn, SectionBinder& rec, SectionBinder& reg) {
  auto& l = cfg.learn;
  learn.bind("images_u", [&l](const std::string& v) {
    l.images_u.clear();
    for (const auto& p : split_list(v)) l.images_u.emplace_back(p);
  }, [&l] { return join_paths(l.images_u); });
  learn.bind("images_v", [&l](const std::string& v) {
    l.images_v.clear();
    for (const auto& p : split_list(v)) l.images_v.emplace_back(p);
  }, [&l] { return join_paths(l.images_v); });
  learn.bind("synthetic_pair", [&l](const std::string& v) {
    try {
      l.synthetic_pair = parse_modality_pair(v);
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
  }, [&l] { return std::string(to_string(l.synthetic_pair)); });
  bind_int(learn, "synthetic_scenes", l.synthetic_scenes);
  bind_int(learn, "synthetic_size", l.synthetic_size);
  bind_int(learn, "patch_side", l.patch_side);
  bind_int(learn, "k", l.k);
  bind_int(learn, "samples", l.samples);
  bind_double(learn, "std_threshold", l.std_threshold);
  bind_double(learn, "nu", l.params.nu);
  bind_double(learn, "kappa_u", l.params.kappa_u);
  bind_double(learn, "kappa_v", l.params.kappa_v);
  bind_double(learn, "mu_u", l.params.mu_u);
  bind_double(learn, "mu_v", l.params.mu_v);
  bind_int(learn, "max_iterations", l.max_iterations);
  bind_double(learn, "tolerance", l.tolerance);
  bind_int(learn, "seed", l.seed);

  auto& r = cfg.reconstruct;
  bind_int(rec, "factor", r.factor);
  rec.bind("lambda_schedule", [&r](const std::string& v) {
    r.lambda_schedule.clear();
    for (const auto& item : split_list(v)) r.lambda_schedule.push_back(parse_double("lambda_schedule", item));
  }, [&r] { return join_doubles(r.lambda_schedule); });
  bind_int(rec, "iterations_per_stage", r.iterations_per_stage);
  bind_optional(rec, "nu", r.nu);
  bind_int(rec, "seed", r.seed);
  rec.bind("nearest_init", [&r](const std::string& v) { r.nearest_init = parse_bool("nearest_init", v); },
           [&r] { return std::string(r.nearest_init ? "true" : "false"); });

  auto& g = cfg.registration;
  reg.bind("group", [&g](const std::string& v) {
    try {
      g.group = parse_group(v);
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
  }, [&g] { return std::string(to_string(g.group)); });
  bind_int(reg, "levels", g.levels);
  bind_int(reg, "border", g.border);
  bind_int(reg, "max_iterations", g.max_iterations);
  bind_double(reg, "tolerance", g.tolerance);
  bind_optional(reg, "nu", g.nu);
  bind_double(reg, "smoothing_sigma", g.smoothing_sigma);
  bind_int(reg, "synthetic_size", g.synthetic_size);
}

}  // namespace

ConfigFile ConfigFile::parse(const std::string& text) {
  ConfigFile file;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool header = false;
  std::string section;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (!header) {
      std::istringstream hs(t);
      std::string magic;
      int version = 0;
      if (!(hs >> magic >> version) || magic != "cosparse-config" || !(hs >> std::ws).eof()) {
        throw ConfigError(where + "expected header 'cosparse-config <version>'");
      }
      if (version != kVersion) throw ConfigError(where + "unsupported config version " + std::to_string(version));
      header = true;
      continue;
    }
    if (t.front() == '[') {
      if (t.back() != ']' || !valid_name(trim(t.substr(1, t.size() - 2)))) {
        throw ConfigError(where + "malformed section header");
      }
      section = trim(t.substr(1, t.size() - 2));
      file.sections_[section];
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    if (section.empty()) throw ConfigError(where + "key outside of any section");
    const std::string key = trim(t.substr(0, eq));
    if (!valid_name(key)) throw ConfigError(where + "invalid key '" + key + "'");
    if (!file.sections_[section].emplace(key, trim(t.substr(eq + 1))).second) {
      throw ConfigError(where + "duplicate key '" + key + "'");
    }
  }
  if (!header) throw ConfigError("missing 'cosparse-config' header");
  return file;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  return parse({std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()});
}

std::string ConfigFile::serialize() const {
  std::ostringstream os;
  os << "cosparse-config " << kVersion << '\n';
  for (const auto& [name, values] : sections_) {
    os << '\n' << '[' << name << "]\n";
    for (const auto& [key, value] : values) os << key << " = " << value << '\n';
  }
  return os.str();
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  return get(section, key).has_value();
}

std::optional<std::string> ConfigFile::get(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return std::nullopt;
  const auto k = s->second.find(key);
  if (k == s->second.end()) return std::nullopt;
  return k->second;
}

void ConfigFile::set(const std::string& section, const std::string& key, std::string value) {
  if (!valid_name(section) || !valid_name(key)) throw ConfigError("invalid section or key name");
  if (value.find('\n') != std::string::npos) throw ConfigError("values cannot span lines");
  sections_[section][key] = trim(value);
}

void ExperimentConfig::validate() const {
  try {
    if (learn.images_u.size() != learn.images_v.size()) {
      throw ConfigError("learn.images_u and learn.images_v must list the same number of images");
    }
    for (const auto* list : {&learn.images_u, &learn.images_v}) {
      for (const auto& p : *list) {
        if (!std::filesystem::exists(p)) throw ConfigError("path does not exist: " + p.string());
      }
    }
    if (learn.synthetic_scenes < 1) throw ConfigError("learn.synthetic_scenes must be positive");
    if (learn.synthetic_size < 32) throw ConfigError("learn.synthetic_size must be at least 32");
    if (learn.patch_side < 2) throw ConfigError("learn.patch_side must be at least 2");
    const int n = learn.patch_side * learn.patch_side;
    if (learn.k != 0 && learn.k < n - 1) throw ConfigError("learn.k must be at least n−1");
    if (learn.samples < 1) throw ConfigError("learn.samples must be positive");
    if (!(learn.std_threshold >= 0.0)) throw ConfigError("learn.std_threshold must be non-negative");
    learn.params.validate();
    if (learn.max_iterations < 1) throw ConfigError("learn.max_iterations must be positive");
    if (!(learn.tolerance > 0.0)) throw ConfigError("learn.tolerance must be positive");

    if (reconstruct.factor < 1) throw ConfigError("reconstruct.factor must be at least 1");
    validate_lambda_schedule(reconstruct.lambda_schedule);
    if (reconstruct.iterations_per_stage < 1) throw ConfigError("reconstruct.iterations_per_stage must be positive");
    if (reconstruct.nu && !(*reconstruct.nu > 0.0)) throw ConfigError("reconstruct.nu must be positive");

    if (registration.levels < 1) throw ConfigError("register.levels must be positive");
    if (registration.border < 0) throw ConfigError("register.border must be non-negative");
    if (registration.max_iterations < 1) throw ConfigError("register.max_iterations must be positive");
    if (!(registration.tolerance > 0.0)) throw ConfigError("register.tolerance must be positive");
    if (registration.nu && !(*registration.nu > 0.0)) throw ConfigError("register.nu must be positive");
    if (!(registration.smoothing_sigma >= 0.0)) throw ConfigError("register.smoothing_sigma must be non-negative");
    if (registration.synthetic_size < 32) throw ConfigError("register.synthetic_size must be at least 32");
    if (2 * registration.border >= registration.synthetic_size) {
      throw ConfigError("register.border leaves no region inside the synthetic scene");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig ExperimentConfig::from_file(const ConfigFile& file) {
  ExperimentConfig cfg;
  SectionBinder learn, rec, reg;
  bind_all(cfg, learn, rec, reg);
  for (const auto& [name, values] : file.sections()) {
    if (name == "learn") learn.read(name, values);
    else if (name == "reconstruct") rec.read(name, values);
    else if (name == "register") reg.read(name, values);
    else throw ConfigError("unknown section [" + name + "]");
  }
  return cfg;
}

ConfigFile ExperimentConfig::to_file() const {
  ExperimentConfig copy = *this;
  SectionBinder learn, rec, reg;
  bind_all(copy, learn, rec, reg);
  ConfigFile file;
  learn.write("learn", file);
  rec.write("reconstruct", file);
  reg.write("register", file);
  return file;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  ExperimentConfig cfg = ExperimentConfig::from_file(ConfigFile::load(path));
  // Relative image paths are resolved against the config's directory.
  const std::filesystem::path base = path.parent_path();
  for (auto* list : {&cfg.learn.images_u, &cfg.learn.images_v}) {
    for (auto& p : *list) {
      if (p.is_relative()) p = base / p;
    }
  }
  cfg.validate();
  return cfg;
}

}  // namespace cosparse
