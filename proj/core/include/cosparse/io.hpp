#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "cosparse/bimodal_model.hpp"
#include "cosparse/image.hpp"
#include "cosparse/lie_group.hpp"

namespace cosparse {

enum class ImageFormat {
  graymap,   // binary PGM (P5), 8-bit; values in [0,1] are quantized to 0..255
  floatmap,  // grayscale PFM (Pf), 32-bit little-endian floats
};

/// Picks the format from the extension: ".pgm" → graymap, anything else → floatmap.
ImageFormat format_for_path(const std::filesystem::path& path);

ModalImage read_image(std::istream& in);
ModalImage read_image(const std::filesystem::path& path);
void write_image(std::ostream& out, const ModalImage& image, ImageFormat format);
void write_image(const std::filesystem::path& path, const ModalImage& image);

/// "COSP1" container: magic, then little-endian uint32 version, k, n, patch side,
/// two length-prefixed tags, the five learning weights and both operators
/// row-major, all as float64.
void write_operator_pair(std::ostream& out, const OperatorPair& pair);
void write_operator_pair(const std::filesystem::path& path, const OperatorPair& pair);
OperatorPair read_operator_pair(std::istream& in);
OperatorPair read_operator_pair(const std::filesystem::path& path);

/// One text line: group tag followed by the nine row-major matrix entries.
std::string format_transform(const GroupElement& tau);
GroupElement parse_transform(const std::string& line);

}  // namespace cosparse
