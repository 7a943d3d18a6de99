#include "cosparse/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "cosparse/errors.hpp"
#include "cosparse/random.hpp"
#include "cosparse/lie_group.hpp"

namespace cosparse {

namespace {

// Evenly spaced levels in [0.1, 0.9], shuffled.
std::vector<double> spread_levels(int count, std::mt19937_64& rng) {
  std::vector<double> levels(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) levels[static_cast<std::size_t>(i)] = 0.1 + 0.8 * i / (count - 1);
  shuffle(levels, rng);
  return levels;
}

bool inside(const SceneLayout::Shape& s, double x, double y) {
  const double dx = x - s.center.x();
  const double dy = y - s.center.y();
  if (s.ellipse) {
    const double c = std::cos(s.angle), sn = std::sin(s.angle);
    const double u = c * dx + sn * dy;
    const double v = -sn * dx + c * dy;
    return (u * u) / (s.a * s.a) + (v * v) / (s.b * s.b) <= 1.0;
  }
  const std::size_t m = s.vertices.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Eigen::Vector2d& p = s.vertices[i];
    const Eigen::Vector2d& q = s.vertices[(i + 1) % m];
    if ((q.x() - p.x()) * (y - p.y()) - (q.y() - p.y()) * (x - p.x()) < 0.0) return false;
  }
  return true;
}

}  // namespace

std::string_view to_string(ModalityPair pair) noexcept {
  return pair == ModalityPair::intensity_depth ? "intensity_depth" : "intensity_nir";
}

ModalityPair parse_modality_pair(std::string_view text) {
  if (text == "intensity_depth") return ModalityPair::intensity_depth;
  if (text == "intensity_nir") return ModalityPair::intensity_nir;
  throw InvalidArgument("unknown modality pair '" + std::string(text) + "'");
}

int SceneLayout::label_at(double x, double y) const {
  for (std::size_t i = shapes.size(); i-- > 0;) {
    if (inside(shapes[i], x, y)) return static_cast<int>(i) + 2;
  }
  return split_normal.dot(Eigen::Vector2d(x, y)) < split_offset ? 0 : 1;
}

double SceneLayout::texture_at(double x, double y) const {
  const double gx = std::clamp(x / texture_spacing + 1.0, 0.0, texture_side - 1.001);
  const double gy = std::clamp(y / texture_spacing + 1.0, 0.0, texture_side - 1.001);
  const int c0 = static_cast<int>(gx);
  const int r0 = static_cast<int>(gy);
  const double fx = gx - c0, fy = gy - r0;
  auto at = [&](int r, int c) { return texture[static_cast<std::size_t>(r) * texture_side + c]; };
  // Smoothstep weights keep the texture differentiable across lattice cells.
  const double sx = fx * fx * (3.0 - 2.0 * fx);
  const double sy = fy * fy * (3.0 - 2.0 * fy);
  const double top = (1.0 - sx) * at(r0, c0) + sx * at(r0, c0 + 1);
  const double bottom = (1.0 - sx) * at(r0 + 1, c0) + sx * at(r0 + 1, c0 + 1);
  return texture_amplitude * ((1.0 - sy) * top + sy * bottom);
}

SceneLayout make_layout(std::uint64_t seed, int size) {
  if (size < 32) throw TooSmall("synthetic scenes need size ≥ 32");
  std::mt19937_64 rng(seed ^ 0x5EC7E5CE5EEDULL);
  SceneLayout layout;
  layout.size = size;
  layout.seed = seed;

  const double s = size;
  const double phi = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  layout.split_normal = {std::cos(phi), std::sin(phi)};
  layout.split_offset = layout.split_normal.dot(Eigen::Vector2d(0.5 * s, 0.5 * s)) + uniform(rng, -0.2, 0.2) * s;

  const int shape_count = uniform_int(rng, 5, 8);
  for (int i = 0; i < shape_count; ++i) {
    SceneLayout::Shape shape;
    shape.center = {uniform(rng, 0.1, 0.9) * s, uniform(rng, 0.1, 0.9) * s};
    const double radius = uniform(rng, 0.08, 0.22) * s;
    if (rng() % 2 == 0) {
      shape.ellipse = true;
      shape.a = radius;
      shape.b = radius * uniform(rng, 0.45, 1.0);
      shape.angle = uniform(rng, 0.0, std::numbers::pi);
    } else {
      shape.ellipse = false;
      const int corners = uniform_int(rng, 3, 6);
      std::vector<double> angles(static_cast<std::size_t>(corners));
      for (double& a : angles) a = uniform(rng, 0.0, 2.0 * std::numbers::pi);
      std::sort(angles.begin(), angles.end());
      for (double a : angles) {
        shape.vertices.push_back(shape.center + radius * Eigen::Vector2d(std::cos(a), std::sin(a)));
      }
    }
    layout.shapes.push_back(std::move(shape));
  }

  const int labels = shape_count + 2;
  layout.depth = spread_levels(labels, rng);
  layout.albedo = spread_levels(labels, rng);
  layout.reversed.resize(static_cast<std::size_t>(labels));
  for (auto& r : layout.reversed) r = (rng() % 3 == 0) ? 1 : 0;
  // Reversed levels are shifted by half a level step. A plain 1 − albedo can
  // coincide with a neighbor's albedo and erase the shared edge.
  const double half_step = 0.4 / (labels - 1);
  layout.nir.resize(static_cast<std::size_t>(labels));
  for (std::size_t i = 0; i < layout.nir.size(); ++i) {
    layout.nir[i] = layout.reversed[i] ? 1.0 - layout.albedo[i] - half_step : layout.albedo[i];
  }

  layout.texture_side = static_cast<int>(std::ceil(s / layout.texture_spacing)) + 3;
  layout.texture.resize(static_cast<std::size_t>(layout.texture_side) * layout.texture_side);
  for (double& t : layout.texture) t = uniform(rng, -1.0, 1.0);
  return layout;
}

SceneLayers render_layers(const SceneLayout& layout, const Eigen::Matrix3d& sample_map) {
  const int n = layout.size;
  SceneLayers out{ModalImage(n, n, "intensity"), ModalImage(n, n, "depth"), ModalImage(n, n, "nir")};
  const double pivot = 0.5 * (n - 1);
  const Eigen::Matrix2d a = sample_map.topLeftCorner<2, 2>();
  const Eigen::Vector2d b = sample_map.block<2, 1>(0, 2);
  constexpr int kSub = 4;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      double depth = 0.0, intensity = 0.0, nir = 0.0;
      for (int i = 0; i < kSub; ++i) {
        for (int j = 0; j < kSub; ++j) {
          // Subsample offsets in eighths of a pixel: −3, −1, 1, 3.
          const Eigen::Vector2d x(c + (2 * j - 3) / 8.0 - pivot, r + (2 * i - 3) / 8.0 - pivot);
          const Eigen::Vector2d p = a * x + b + Eigen::Vector2d(pivot, pivot);
          const int label = layout.label_at(p.x(), p.y());
          const double albedo = layout.albedo[static_cast<std::size_t>(label)];
          const double tex = layout.texture_at(p.x(), p.y());
          depth += layout.depth[static_cast<std::size_t>(label)];
          intensity += albedo + tex;
          nir += layout.nir[static_cast<std::size_t>(label)] + tex;
        }
      }
      constexpr double norm = 1.0 / (kSub * kSub);
      out.depth(r, c) = depth * norm;
      out.intensity(r, c) = intensity * norm;
      out.nir(r, c) = nir * norm;
    }
  }
  return out;
}

SyntheticScene generate_scene(std::uint64_t seed, int size, ModalityPair pair) {
  SceneLayers layers = render_layers(make_layout(seed, size));
  SyntheticScene scene;
  scene.first = std::move(layers.intensity);
  scene.second = pair == ModalityPair::intensity_depth ? std::move(layers.depth) : std::move(layers.nir);
  scene.seed = seed;
  scene.pair = pair;
  return scene;
}

ModalImage generate_deregistered(std::uint64_t seed, int size, ModalityPair pair, double tx, double ty,
                                 double theta_deg) {
  const Eigen::Matrix3d inverse = rigid_transform(tx, ty, theta_deg).inverse().matrix();
  SceneLayers layers = render_layers(make_layout(seed, size), inverse);
  return pair == ModalityPair::intensity_depth ? std::move(layers.depth) : std::move(layers.nir);
}

std::vector<std::uint8_t> edge_map(const ModalImage& image, double threshold) {
  const int w = image.width();
  const int h = image.height();
  std::vector<double> gx(image.size(), 0.0), gy(image.size(), 0.0), mag(image.size(), 0.0);
  for (int r = 1; r + 1 < h; ++r) {
    for (int c = 1; c + 1 < w; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * w + c;
      gx[i] = 0.5 * (image(r, c + 1) - image(r, c - 1));
      gy[i] = 0.5 * (image(r + 1, c) - image(r - 1, c));
      mag[i] = std::hypot(gx[i], gy[i]);
    }
  }
  // Non-maximum suppression against the magnitude interpolated one pixel
  // along the gradient direction, so edge width does not grow with contrast.
  auto mag_at = [&](double row, double col) {
    const int r0 = static_cast<int>(std::floor(row));
    const int c0 = static_cast<int>(std::floor(col));
    const double fr = row - r0, fc = col - c0;
    auto m = [&](int r, int c) { return mag[static_cast<std::size_t>(r) * w + c]; };
    return (1 - fr) * ((1 - fc) * m(r0, c0) + fc * m(r0, c0 + 1)) +
           fr * ((1 - fc) * m(r0 + 1, c0) + fc * m(r0 + 1, c0 + 1));
  };
  std::vector<std::uint8_t> edges(image.size(), 0);
  for (int r = 2; r + 2 < h; ++r) {
    for (int c = 2; c + 2 < w; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * w + c;
      if (mag[i] <= threshold) continue;
      const double ux = gx[i] / mag[i], uy = gy[i] / mag[i];
      const double ahead = mag_at(r + uy, c + ux);
      const double behind = mag_at(r - uy, c - ux);
      edges[i] = (mag[i] >= ahead && mag[i] >= behind) ? 1 : 0;
    }
  }
  return edges;
}

double jaccard_index(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
  if (a.size() != b.size()) throw DimensionMismatch("edge maps differ in size");
  std::size_t both = 0, either = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    both += (a[i] && b[i]) ? 1 : 0;
    either += (a[i] || b[i]) ? 1 : 0;
  }
  return either == 0 ? 1.0 : static_cast<double>(both) / static_cast<double>(either);
}

}  // namespace cosparse
