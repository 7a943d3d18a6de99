#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cosparse {

/// Single-channel image stored row-major: value(r, c) = values[r·width + c].
class ModalImage {
 public:
  ModalImage() = default;
  ModalImage(int width, int height, std::string modality_tag = {});
  ModalImage(int width, int height, std::vector<double> values, std::string modality_tag = {});

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double operator()(int row, int col) const { return values_[index(row, col)]; }
  double& operator()(int row, int col) { return values_[index(row, col)]; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  Eigen::Map<const Eigen::VectorXd> vector() const {
    return {values_.data(), static_cast<Eigen::Index>(values_.size())};
  }
  Eigen::Map<Eigen::VectorXd> vector() { return {values_.data(), static_cast<Eigen::Index>(values_.size())}; }

  const std::string& modality_tag() const noexcept { return tag_; }
  void set_modality_tag(std::string tag) { tag_ = std::move(tag); }

  bool same_shape(const ModalImage& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  /// Throws InvalidArgument if any value is NaN or infinite.
  void check_finite() const;

  double min_value() const;
  double max_value() const;

  /// Affinely maps [min, max] onto [0, 1]; constant images map to 0.
  ModalImage rescaled_unit() const;

  /// Rectangular sub-image; throws InvalidArgument when out of bounds.
  ModalImage crop(int x0, int y0, int width, int height) const;

  static ModalImage from_vector(int width, int height, const Eigen::VectorXd& v,
                                std::string modality_tag = {});

 private:
  std::size_t index(int row, int col) const noexcept {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(col);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
  std::string tag_;
};

/// Normalized (side×side) Gaussian kernel, row-major. `side` must be odd.
std::vector<double> gaussian_kernel(int side, double sigma);

/// Correlates the image with a centered odd-sided kernel, mirroring at the borders.
ModalImage filter_reflective(const ModalImage& image, const std::vector<double>& kernel, int side);

/// Whole-sample symmetric reflection of an index into [0, n): −1 ↦ 1, n ↦ n−2.
int reflect_index(int i, int n) noexcept;

}  // namespace cosparse
