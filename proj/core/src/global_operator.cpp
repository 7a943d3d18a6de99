#include "cosparse/global_operator.hpp"

#include <cmath>
#include <vector>

#include "cosparse/errors.hpp"

namespace cosparse {

GlobalAnalysis::GlobalAnalysis(AnalysisOperator op, int width, int height, PatchBoundary boundary)
    : op_(std::move(op)), width_(width), height_(height), boundary_(boundary) {
  if (width <= 0 || height <= 0) throw InvalidArgument("image dimensions must be positive");
  const int side = op_.patch_side();
  if (side <= 0) throw InvalidArgument("patch operator is empty");
  scale_ = 1.0 / static_cast<double>(side);
  anchor_ = side % 2 == 1 ? (side - 1) / 2 : side / 2 - 1;
  if (boundary_ == PatchBoundary::reflective) {
    positions_x_ = width;
    positions_y_ = height;
  } else {
    if (width < side || height < side) throw TooSmall("image smaller than one patch");
    positions_x_ = width - side + 1;
    positions_y_ = height - side + 1;
  }
}

int GlobalAnalysis::patch_origin_row(int position_row) const noexcept {
  return boundary_ == PatchBoundary::reflective ? position_row - anchor_ : position_row;
}

int GlobalAnalysis::patch_origin_col(int position_col) const noexcept {
  return boundary_ == PatchBoundary::reflective ? position_col - anchor_ : position_col;
}

namespace {

// Image row/column index of patch offset i for every position along one axis.
std::vector<int> offset_table(int positions, int side, int extent, int anchor, bool reflective) {
  std::vector<int> table(static_cast<std::size_t>(positions) * side);
  for (int p = 0; p < positions; ++p) {
    for (int i = 0; i < side; ++i) {
      const int raw = reflective ? p - anchor + i : p + i;
      table[static_cast<std::size_t>(p) * side + i] = reflect_index(raw, extent);
    }
  }
  return table;
}

}  // namespace

Eigen::VectorXd GlobalAnalysis::apply(std::span<const double> image) const {
  if (static_cast<Eigen::Index>(image.size()) != input_size()) {
    throw DimensionMismatch("image size does not match the global operator");
  }
  const int side = op_.patch_side();
  const Eigen::Index k = op_.row_count();
  const Eigen::Index n = op_.patch_size();
  const bool reflective = boundary_ == PatchBoundary::reflective;
  const auto rows = offset_table(positions_y_, side, height_, anchor_, reflective);
  const auto cols = offset_table(positions_x_, side, width_, anchor_, reflective);

  Eigen::VectorXd out(output_size());
  Eigen::MatrixXd patches(n, positions_x_);
  for (int pr = 0; pr < positions_y_; ++pr) {
    for (int pc = 0; pc < positions_x_; ++pc) {
      for (int i = 0; i < side; ++i) {
        const std::size_t base = static_cast<std::size_t>(rows[static_cast<std::size_t>(pr) * side + i]) * width_;
        for (int j = 0; j < side; ++j) {
          patches(i * side + j, pc) = image[base + cols[static_cast<std::size_t>(pc) * side + j]];
        }
      }
    }
    Eigen::Map<Eigen::MatrixXd> block(out.data() + static_cast<Eigen::Index>(pr) * positions_x_ * k, k,
                                      positions_x_);
    block.noalias() = scale_ * (op_.rows() * patches);
  }
  return out;
}

Eigen::VectorXd GlobalAnalysis::apply(const ModalImage& image) const {
  if (image.width() != width_ || image.height() != height_) {
    throw DimensionMismatch("image dimensions do not match the global operator");
  }
  return apply(image.values());
}

Eigen::VectorXd GlobalAnalysis::apply_adjoint(std::span<const double> coeffs) const {
  if (static_cast<Eigen::Index>(coeffs.size()) != output_size()) {
    throw DimensionMismatch("coefficient vector size does not match the global operator");
  }
  const int side = op_.patch_side();
  const Eigen::Index k = op_.row_count();
  const Eigen::Index n = op_.patch_size();
  const bool reflective = boundary_ == PatchBoundary::reflective;
  const auto rows = offset_table(positions_y_, side, height_, anchor_, reflective);
  const auto cols = offset_table(positions_x_, side, width_, anchor_, reflective);

  Eigen::VectorXd out = Eigen::VectorXd::Zero(input_size());
  Eigen::MatrixXd patches(n, positions_x_);
  for (int pr = 0; pr < positions_y_; ++pr) {
    Eigen::Map<const Eigen::MatrixXd> block(
        coeffs.data() + static_cast<Eigen::Index>(pr) * positions_x_ * k, k, positions_x_);
    patches.noalias() = scale_ * (op_.rows().transpose() * block);
    for (int pc = 0; pc < positions_x_; ++pc) {
      for (int i = 0; i < side; ++i) {
        const std::size_t base = static_cast<std::size_t>(rows[static_cast<std::size_t>(pr) * side + i]) * width_;
        for (int j = 0; j < side; ++j) {
          out[static_cast<Eigen::Index>(base + cols[static_cast<std::size_t>(pc) * side + j])] +=
              patches(i * side + j, pc);
        }
      }
    }
  }
  return out;
}

}  // namespace cosparse
