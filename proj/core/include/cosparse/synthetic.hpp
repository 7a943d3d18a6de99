#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cosparse/image.hpp"

namespace cosparse {

enum class ModalityPair { intensity_depth, intensity_nir };

std::string_view to_string(ModalityPair pair) noexcept;
/// Accepts "intensity_depth" or "intensity_nir"; throws InvalidArgument otherwise.
ModalityPair parse_modality_pair(std::string_view text);

/// Random piecewise-constant scene geometry. Label 0 and 1 are the two halves of
/// the background split by a line; label 2 + i is shape i (later shapes on top).
struct SceneLayout {
  struct Shape {
    bool ellipse = true;
    Eigen::Vector2d center = Eigen::Vector2d::Zero();
    double a = 1.0, b = 1.0, angle = 0.0;  // ellipse semi-axes and orientation
    std::vector<Eigen::Vector2d> vertices; // convex polygon, counter-clockwise
  };

  int size = 0;
  std::uint64_t seed = 0;
  Eigen::Vector2d split_normal = Eigen::Vector2d::UnitX();
  double split_offset = 0.0;
  std::vector<Shape> shapes;
  std::vector<double> depth;      // per label
  std::vector<double> albedo;     // per label
  std::vector<std::uint8_t> reversed;  // per label, NIR contrast reversal
  std::vector<double> nir;        // per label
  std::vector<double> texture;    // value-noise lattice, row-major
  int texture_side = 0;
  double texture_amplitude = 0.04;
  double texture_spacing = 8.0;

  int label_count() const noexcept { return static_cast<int>(depth.size()); }
  /// Label of the scene point (x, y) in pixel coordinates.
  int label_at(double x, double y) const;
  double texture_at(double x, double y) const;
};

/// Deterministic layout for a size×size scene. Throws TooSmall when size < 32.
SceneLayout make_layout(std::uint64_t seed, int size);

struct SceneLayers {
  ModalImage intensity;
  ModalImage depth;
  ModalImage nir;
};

/// Renders the layout with 4×4 supersampling. Output pixel x shows the scene at
/// pivot + A·(x − pivot) + b for `sample_map` = [A b; 0 1] (identity by default),
/// with pivot the image center.
SceneLayers render_layers(const SceneLayout& layout,
                          const Eigen::Matrix3d& sample_map = Eigen::Matrix3d::Identity());

struct SyntheticScene {
  ModalImage first;   // intensity
  ModalImage second;  // depth or NIR
  std::uint64_t seed = 0;
  ModalityPair pair = ModalityPair::intensity_depth;
};

SyntheticScene generate_scene(std::uint64_t seed, int size, ModalityPair pair);

/// Second modality rendered as J = V∘τ⁻¹ for τ = rigid_transform(tx, ty, θ)
/// about the image center, so that J(τx) = V(x).
ModalImage generate_deregistered(std::uint64_t seed, int size, ModalityPair pair, double tx, double ty,
                                 double theta_deg);

/// Thin edges: pixels whose central-difference gradient magnitude exceeds
/// `threshold` and is a local maximum along the gradient direction.
std::vector<std::uint8_t> edge_map(const ModalImage& image, double threshold);

/// |A ∩ B| / |A ∪ B| of two equally sized binary maps (1 when both are empty).
double jaccard_index(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b);

}  // namespace cosparse
