#pragma once

#include <span>

#include <Eigen/Dense>

#include "cosparse/bimodal_model.hpp"
#include "cosparse/image.hpp"

namespace cosparse {

enum class PatchBoundary {
  reflective,  // every pixel anchors a patch; borders mirrored (whole-sample symmetric)
  valid,       // only patches lying fully inside the image
};

/// Whole-image analysis operator built by applying a patch operator at every
/// patch position. Coefficients are stored position-major: the k responses of
/// position p occupy entries [p·k, (p+1)·k). Patches are scaled by 1/√n.
///
/// With reflective boundaries a patch of odd side s is centered on its anchor
/// pixel; for even s the anchor is the top-left pixel of the central 2×2 block.
class GlobalAnalysis {
 public:
  GlobalAnalysis(AnalysisOperator op, int width, int height,
                 PatchBoundary boundary = PatchBoundary::reflective);

  const AnalysisOperator& patch_operator() const noexcept { return op_; }
  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  PatchBoundary boundary() const noexcept { return boundary_; }

  int positions_x() const noexcept { return positions_x_; }
  int positions_y() const noexcept { return positions_y_; }
  Eigen::Index position_count() const noexcept {
    return static_cast<Eigen::Index>(positions_x_) * positions_y_;
  }
  Eigen::Index output_size() const noexcept { return position_count() * op_.row_count(); }
  Eigen::Index input_size() const noexcept { return static_cast<Eigen::Index>(width_) * height_; }

  /// Top-left image coordinate of the patch at a position, before reflection.
  int patch_origin_row(int position_row) const noexcept;
  int patch_origin_col(int position_col) const noexcept;

  /// Throws DimensionMismatch when the input length is not width·height.
  Eigen::VectorXd apply(std::span<const double> image) const;
  Eigen::VectorXd apply(const ModalImage& image) const;

  /// Exact adjoint: scatters Ωᵀ·coefficients back with the same reflections.
  Eigen::VectorXd apply_adjoint(std::span<const double> coeffs) const;

 private:
  AnalysisOperator op_;
  int width_;
  int height_;
  PatchBoundary boundary_;
  int positions_x_ = 0;
  int positions_y_ = 0;
  int anchor_ = 0;
  double scale_ = 1.0;
};

}  // namespace cosparse
