#include "cosparse/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <limits>
#include <sstream>

#include "cosparse/errors.hpp"

namespace cosparse {

namespace {

constexpr char kOperatorMagic[5] = {'C', 'O', 'S', 'P', '1'};
constexpr std::uint32_t kOperatorVersion = 1;

std::string slurp(std::istream& in) {
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Cursor over an in-memory file that reports byte offsets in errors.
class Reader {
 public:
  explicit Reader(std::string data) : data_(std::move(data)) {}

  std::size_t offset() const noexcept { return pos_; }
  bool at_end() const noexcept { return pos_ >= data_.size(); }

  [[noreturn]] void fail(const std::string& what) const { throw MalformedFile(what, pos_); }

  void skip_header_space() {
    while (pos_ < data_.size()) {
      const char ch = data_[pos_];
      if (ch == '#') {
        while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(ch))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string token() {
    skip_header_space();
    const std::size_t start = pos_;
    while (pos_ < data_.size() && !std::isspace(static_cast<unsigned char>(data_[pos_]))) ++pos_;
    if (start == pos_) fail("unexpected end of header");
    return data_.substr(start, pos_ - start);
  }

  long long integer(long long lo, long long hi) {
    const std::size_t at = (skip_header_space(), pos_);
    const std::string t = token();
    long long v = 0;
    std::size_t used = 0;
    try {
      v = std::stoll(t, &used);
    } catch (const std::exception&) {
      throw MalformedFile("expected an integer", at);
    }
    if (used != t.size() || v < lo || v > hi) throw MalformedFile("integer out of range", at);
    return v;
  }

  double real() {
    const std::size_t at = (skip_header_space(), pos_);
    const std::string t = token();
    double v = 0.0;
    std::size_t used = 0;
    try {
      v = std::stod(t, &used);
    } catch (const std::exception&) {
      throw MalformedFile("expected a number", at);
    }
    if (used != t.size() || !std::isfinite(v)) throw MalformedFile("invalid number", at);
    return v;
  }

  // Exactly one whitespace byte separates a netpbm header from its raster.
  void single_space() {
    if (at_end() || !std::isspace(static_cast<unsigned char>(data_[pos_]))) fail("missing header terminator");
    ++pos_;
  }

  const unsigned char* bytes(std::size_t count) {
    if (data_.size() - pos_ < count) fail("file truncated");
    const auto* p = reinterpret_cast<const unsigned char*>(data_.data() + pos_);
    pos_ += count;
    return p;
  }

  std::uint32_t u32() {
    const unsigned char* p = bytes(4);
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
  }

  double f64() {
    const unsigned char* p = bytes(8);
    std::uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) bits = bits << 8 | p[i];
    return std::bit_cast<double>(bits);
  }

 private:
  std::string data_;
  std::size_t pos_ = 0;
};

void put_u32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8 & 0xff),
                     static_cast<char>(v >> 16 & 0xff), static_cast<char>(v >> 24 & 0xff)};
  out.write(b, 4);
}

void put_f64(std::ostream& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  char b[8];
  for (char& c : b) {
    c = static_cast<char>(bits & 0xff);
    bits >>= 8;
  }
  out.write(b, 8);
}

void put_f32(std::ostream& out, float v) {
  std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
  char b[4];
  for (char& c : b) {
    c = static_cast<char>(bits & 0xff);
    bits >>= 8;
  }
  out.write(b, 4);
}

ModalImage read_graymap(Reader& r) {
  const int w = static_cast<int>(r.integer(1, 1 << 20));
  const int h = static_cast<int>(r.integer(1, 1 << 20));
  const int maxval = static_cast<int>(r.integer(1, 255));
  r.single_space();
  const unsigned char* p = r.bytes(static_cast<std::size_t>(w) * h);
  ModalImage image(w, h);
  auto values = image.values();
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<double>(p[i]) / maxval;
  return image;
}

ModalImage read_floatmap(Reader& r) {
  const int w = static_cast<int>(r.integer(1, 1 << 20));
  const int h = static_cast<int>(r.integer(1, 1 << 20));
  const std::size_t scale_at = (r.skip_header_space(), r.offset());
  const double scale = r.real();
  if (scale == 0.0) throw MalformedFile("floatmap scale must be nonzero", scale_at);
  const bool little = scale < 0.0;
  r.single_space();
  const unsigned char* p = r.bytes(static_cast<std::size_t>(w) * h * 4);
  ModalImage image(w, h);
  // Rows are stored bottom to top.
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      const unsigned char* q = p + (static_cast<std::size_t>(h - 1 - row) * w + col) * 4;
      const std::uint32_t bits =
          little ? (static_cast<std::uint32_t>(q[0]) | static_cast<std::uint32_t>(q[1]) << 8 |
                    static_cast<std::uint32_t>(q[2]) << 16 | static_cast<std::uint32_t>(q[3]) << 24)
                 : (static_cast<std::uint32_t>(q[3]) | static_cast<std::uint32_t>(q[2]) << 8 |
                    static_cast<std::uint32_t>(q[1]) << 16 | static_cast<std::uint32_t>(q[0]) << 24);
      const float v = std::bit_cast<float>(bits);
      if (!std::isfinite(v)) throw MalformedFile("non-finite sample", r.offset());
      image(row, col) = v;
    }
  }
  return image;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MalformedFile("cannot open '" + path.string() + "' for writing", 0);
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MalformedFile("cannot open '" + path.string() + "'", 0);
  return in;
}

}  // namespace

ImageFormat format_for_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".pgm" ? ImageFormat::graymap : ImageFormat::floatmap;
}

ModalImage read_image(std::istream& in) {
  Reader r(slurp(in));
  const std::string magic = r.token();
  if (magic == "P5") return read_graymap(r);
  if (magic == "Pf") return read_floatmap(r);
  throw MalformedFile("unknown image magic '" + magic.substr(0, 8) + "'", 0);
}

ModalImage read_image(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  return read_image(in);
}

void write_image(std::ostream& out, const ModalImage& image, ImageFormat format) {
  if (image.empty()) throw InvalidArgument("cannot write an empty image");
  image.check_finite();
  if (format == ImageFormat::graymap) {
    out << "P5\n" << image.width() << ' ' << image.height() << "\n255\n";
    for (double v : image.values()) {
      out.put(static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0))));
    }
  } else {
    out << "Pf\n" << image.width() << ' ' << image.height() << "\n-1.0\n";
    for (int row = image.height() - 1; row >= 0; --row) {
      for (int col = 0; col < image.width(); ++col) put_f32(out, static_cast<float>(image(row, col)));
    }
  }
  if (!out) throw MalformedFile("write failed", 0);
}

void write_image(const std::filesystem::path& path, const ModalImage& image) {
  std::ofstream out = open_output(path);
  write_image(out, image, format_for_path(path));
}

void write_operator_pair(std::ostream& out, const OperatorPair& pair) {
  pair.validate();
  out.write(kOperatorMagic, sizeof kOperatorMagic);
  put_u32(out, kOperatorVersion);
  put_u32(out, static_cast<std::uint32_t>(pair.omega_u.row_count()));
  put_u32(out, static_cast<std::uint32_t>(pair.omega_u.patch_size()));
  put_u32(out, static_cast<std::uint32_t>(pair.omega_u.patch_side()));
  for (const std::string* tag : {&pair.omega_u.modality_tag(), &pair.omega_v.modality_tag()}) {
    put_u32(out, static_cast<std::uint32_t>(tag->size()));
    out.write(tag->data(), static_cast<std::streamsize>(tag->size()));
  }
  const LearningParams& p = pair.params;
  for (double v : {p.nu, p.kappa_u, p.kappa_v, p.mu_u, p.mu_v}) put_f64(out, v);
  for (const Eigen::MatrixXd* m : {&pair.omega_u.rows(), &pair.omega_v.rows()}) {
    for (Eigen::Index i = 0; i < m->rows(); ++i) {
      for (Eigen::Index j = 0; j < m->cols(); ++j) put_f64(out, (*m)(i, j));
    }
  }
  if (!out) throw MalformedFile("write failed", 0);
}

void write_operator_pair(const std::filesystem::path& path, const OperatorPair& pair) {
  std::ofstream out = open_output(path);
  write_operator_pair(out, pair);
}

OperatorPair read_operator_pair(std::istream& in) {
  Reader r(slurp(in));
  const unsigned char* magic = r.bytes(sizeof kOperatorMagic);
  if (std::memcmp(magic, kOperatorMagic, sizeof kOperatorMagic) != 0) {
    throw MalformedFile("not a COSP1 operator file", 0);
  }
  const std::size_t version_at = r.offset();
  if (r.u32() != kOperatorVersion) throw MalformedFile("unsupported operator file version", version_at);
  const std::size_t dims_at = r.offset();
  const std::uint32_t k = r.u32();
  const std::uint32_t n = r.u32();
  const std::uint32_t side = r.u32();
  if (k == 0 || n == 0 || k > 1u << 16 || n > 1u << 16 || static_cast<std::uint64_t>(side) * side != n) {
    throw MalformedFile("inconsistent operator dimensions", dims_at);
  }
  std::string tags[2];
  for (std::string& tag : tags) {
    const std::size_t at = r.offset();
    const std::uint32_t len = r.u32();
    if (len > 4096) throw MalformedFile("modality tag too long", at);
    const unsigned char* p = r.bytes(len);
    tag.assign(reinterpret_cast<const char*>(p), len);
  }
  LearningParams params;
  for (double* v : {&params.nu, &params.kappa_u, &params.kappa_v, &params.mu_u, &params.mu_v}) *v = r.f64();
  Eigen::MatrixXd rows[2];
  for (Eigen::MatrixXd& m : rows) {
    m.resize(k, n);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = r.f64();
    }
  }
  if (!r.at_end()) throw MalformedFile("trailing bytes after operator data", r.offset());
  try {
    OperatorPair pair{AnalysisOperator(std::move(rows[0]), tags[0]),
                      AnalysisOperator(std::move(rows[1]), tags[1]), params};
    pair.params.validate();
    return pair;
  } catch (const Error& e) {
    throw MalformedFile(std::string("invalid operator contents: ") + e.what(), dims_at);
  }
}

OperatorPair read_operator_pair(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  return read_operator_pair(in);
}

std::string format_transform(const GroupElement& tau) {
  std::ostringstream os;
  os << to_string(tau.group()) << std::setprecision(17);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) os << ' ' << tau.matrix()(i, j);
  }
  return os.str();
}

GroupElement parse_transform(const std::string& line) {
  Reader r(line);
  const std::string tag = r.token();
  GroupKind group;
  try {
    group = parse_group(tag);
  } catch (const Error&) {
    throw MalformedFile("unknown group tag '" + tag + "'", 0);
  }
  Eigen::Matrix3d m;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) m(i, j) = r.real();
  }
  r.skip_header_space();
  if (!r.at_end()) throw MalformedFile("trailing characters in transform record", r.offset());
  if (!in_group(m, group)) throw MalformedFile("matrix is not in the stated group", 0);
  return GroupElement(m, group);
}

}  // namespace cosparse
