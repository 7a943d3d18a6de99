#include "cosparse/image.hpp"

#include <algorithm>
#include <cmath>

#include "cosparse/errors.hpp"

namespace cosparse {

ModalImage::ModalImage(int width, int height, std::string modality_tag)
    : ModalImage(width, height,
                 std::vector<double>(static_cast<std::size_t>(std::max(width, 0)) *
                                     static_cast<std::size_t>(std::max(height, 0))),
                 std::move(modality_tag)) {}

ModalImage::ModalImage(int width, int height, std::vector<double> values, std::string modality_tag)
    : width_(width), height_(height), values_(std::move(values)), tag_(std::move(modality_tag)) {
  if (width <= 0 || height <= 0) throw InvalidArgument("image dimensions must be positive");
  if (values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw DimensionMismatch("image value count differs from width*height");
  }
}

void ModalImage::check_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidArgument("image contains non-finite values");
  }
}

double ModalImage::min_value() const { return *std::min_element(values_.begin(), values_.end()); }
double ModalImage::max_value() const { return *std::max_element(values_.begin(), values_.end()); }

ModalImage ModalImage::rescaled_unit() const {
  ModalImage out = *this;
  const double lo = min_value();
  const double range = max_value() - lo;
  for (double& v : out.values_) v = range > 0.0 ? (v - lo) / range : 0.0;
  return out;
}

ModalImage ModalImage::crop(int x0, int y0, int width, int height) const {
  if (x0 < 0 || y0 < 0 || width <= 0 || height <= 0 || x0 + width > width_ || y0 + height > height_) {
    throw InvalidArgument("crop rectangle outside image");
  }
  ModalImage out(width, height, tag_);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) out(r, c) = (*this)(y0 + r, x0 + c);
  }
  return out;
}

ModalImage ModalImage::from_vector(int width, int height, const Eigen::VectorXd& v,
                                   std::string modality_tag) {
  return ModalImage(width, height, std::vector<double>(v.data(), v.data() + v.size()),
                    std::move(modality_tag));
}

std::vector<double> gaussian_kernel(int side, double sigma) {
  if (side <= 0 || side % 2 == 0) throw InvalidArgument("kernel side must be odd and positive");
  if (!(sigma > 0.0)) throw InvalidArgument("kernel sigma must be positive");
  const int half = side / 2;
  std::vector<double> kernel(static_cast<std::size_t>(side) * side);
  double total = 0.0;
  for (int i = 0; i < side; ++i) {
    for (int j = 0; j < side; ++j) {
      const double di = i - half;
      const double dj = j - half;
      const double w = std::exp(-(di * di + dj * dj) / (2.0 * sigma * sigma));
      kernel[static_cast<std::size_t>(i) * side + j] = w;
      total += w;
    }
  }
  for (double& w : kernel) w /= total;
  return kernel;
}

ModalImage filter_reflective(const ModalImage& image, const std::vector<double>& kernel, int side) {
  if (side <= 0 || side % 2 == 0 || kernel.size() != static_cast<std::size_t>(side) * side) {
    throw InvalidArgument("kernel must be odd-sided and square");
  }
  const int half = side / 2;
  ModalImage out(image.width(), image.height(), image.modality_tag());
  for (int r = 0; r < image.height(); ++r) {
    for (int c = 0; c < image.width(); ++c) {
      double acc = 0.0;
      for (int i = 0; i < side; ++i) {
        const int rr = reflect_index(r + i - half, image.height());
        for (int j = 0; j < side; ++j) {
          acc += kernel[static_cast<std::size_t>(i) * side + j] * image(rr, reflect_index(c + j - half, image.width()));
        }
      }
      out(r, c) = acc;
    }
  }
  return out;
}

int reflect_index(int i, int n) noexcept {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

}  // namespace cosparse
