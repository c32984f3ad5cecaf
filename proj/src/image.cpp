#include "ncdnet/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "ncdnet/error.hpp"
#include "ncdnet/matrix_io.hpp"

namespace ncdnet {
namespace {

class PnmReader {
 public:
  explicit PnmReader(std::string_view data) : data_(data) {}

  // Next whitespace-delimited header token, skipping '#' comments.
  long next_int() {
    skip_space_and_comments();
    const std::size_t start = pos_;
    while (pos_ < data_.size() && std::isdigit(static_cast<unsigned char>(data_[pos_]))) ++pos_;
    if (start == pos_) throw Error(Errc::BadFormat, "expected an integer at byte " + std::to_string(start));
    if (pos_ - start > 9) throw Error(Errc::BadFormat, "integer too large");
    return std::stol(std::string(data_.substr(start, pos_ - start)));
  }

  std::string_view magic() {
    if (data_.size() < 2) throw Error(Errc::BadFormat, "file too short for a PNM header");
    pos_ = 2;
    return data_.substr(0, 2);
  }

  // Exactly one whitespace byte separates the header from binary data.
  std::size_t binary_start() {
    if (pos_ >= data_.size() || !std::isspace(static_cast<unsigned char>(data_[pos_]))) {
      throw Error(Errc::BadFormat, "missing whitespace before binary raster");
    }
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < data_.size()) {
      if (std::isspace(static_cast<unsigned char>(data_[pos_]))) {
        ++pos_;
      } else if (data_[pos_] == '#') {
        while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
    if (pos_ >= data_.size()) throw Error(Errc::BadFormat, "unexpected end of PGM data");
  }

  std::string_view data_;
  std::size_t pos_ = 0;
};

std::uint8_t rescale(long v, long maxval) {
  if (v > maxval) throw Error(Errc::BadFormat, "sample exceeds maxval");
  if (maxval == 255) return static_cast<std::uint8_t>(v);
  return static_cast<std::uint8_t>(std::lround(static_cast<double>(v) * 255.0 / static_cast<double>(maxval)));
}

}  // namespace

GrayImage decode_pgm(std::string_view data) {
  PnmReader reader(data);
  const auto magic = reader.magic();
  if (magic != "P2" && magic != "P5") throw Error(Errc::BadFormat, "not a PGM (P2/P5) file");
  const long w = reader.next_int();
  const long h = reader.next_int();
  const long maxval = reader.next_int();
  if (w < 1 || h < 1) throw Error(Errc::BadFormat, "image dimensions must be >= 1");
  if (maxval < 1 || maxval > 65535) throw Error(Errc::BadFormat, "maxval out of range");

  GrayImage img{PixelMatrix(h, w)};
  if (magic == "P2") {
    for (long y = 0; y < h; ++y)
      for (long x = 0; x < w; ++x) {
        long v = 0;
        try {
          v = reader.next_int();
        } catch (const Error&) {
          throw Error(Errc::BadFormat, "truncated P2 raster");
        }
        img.pixels(y, x) = rescale(v, maxval);
      }
    return img;
  }

  const std::size_t start = reader.binary_start();
  const std::size_t bytes_per = maxval > 255 ? 2 : 1;
  const std::size_t need = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * bytes_per;
  if (data.size() < start + need) throw Error(Errc::BadFormat, "truncated P5 raster");
  for (long y = 0; y < h; ++y)
    for (long x = 0; x < w; ++x) {
      const std::size_t at = start + (static_cast<std::size_t>(y * w + x)) * bytes_per;
      long v = static_cast<unsigned char>(data[at]);
      if (bytes_per == 2) v = (v << 8) | static_cast<unsigned char>(data[at + 1]);
      img.pixels(y, x) = rescale(v, maxval);
    }
  return img;
}

GrayImage load_image(const std::filesystem::path& path) {
  const auto data = read_file(path);
  try {
    return decode_pgm(data);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::string encode_pgm(const GrayImage& img, bool binary) {
  std::ostringstream out;
  out << (binary ? "P5" : "P2") << '\n' << img.width() << ' ' << img.height() << "\n255\n";
  for (Eigen::Index y = 0; y < img.height(); ++y) {
    for (Eigen::Index x = 0; x < img.width(); ++x) {
      if (binary) {
        out.put(static_cast<char>(img.pixels(y, x)));
      } else {
        out << (x ? " " : "") << static_cast<int>(img.pixels(y, x));
      }
    }
    if (!binary) out << '\n';
  }
  return out.str();
}

void save_pgm(const std::filesystem::path& path, const GrayImage& img) { write_file(path, encode_pgm(img)); }

GrayImage to_grayscale(const PixelMatrix& r, const PixelMatrix& g, const PixelMatrix& b) {
  if (r.rows() != g.rows() || r.rows() != b.rows() || r.cols() != g.cols() || r.cols() != b.cols()) {
    throw Error(Errc::ShapeMismatch, "color channels differ in size");
  }
  if (r.size() == 0) throw Error(Errc::ShapeMismatch, "empty channels");
  GrayImage img{PixelMatrix(r.rows(), r.cols())};
  for (Eigen::Index y = 0; y < r.rows(); ++y)
    for (Eigen::Index x = 0; x < r.cols(); ++x) {
      const double luma = 0.299 * r(y, x) + 0.587 * g(y, x) + 0.114 * b(y, x);
      img.pixels(y, x) = static_cast<std::uint8_t>(std::clamp(std::lround(luma), 0L, 255L));
    }
  return img;
}

GrayImage median_denoise(const GrayImage& img, int window) {
  if (window < 3 || window % 2 == 0) throw Error(Errc::BadWindow, "median window must be odd and >= 3");
  const Eigen::Index h = img.height(), w = img.width();
  const int r = window / 2;
  GrayImage out{PixelMatrix(h, w)};
  std::vector<std::uint8_t> buf(static_cast<std::size_t>(window * window));
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) {
      std::size_t k = 0;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          const auto yy = std::clamp<Eigen::Index>(y + dy, 0, h - 1);
          const auto xx = std::clamp<Eigen::Index>(x + dx, 0, w - 1);
          buf[k++] = img.pixels(yy, xx);
        }
      std::nth_element(buf.begin(), buf.begin() + buf.size() / 2, buf.end());
      out.pixels(y, x) = buf[buf.size() / 2];
    }
  return out;
}

AugmentOp parse_augment_op(std::string_view text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const auto colon = text.find(':', start);
    parts.emplace_back(text.substr(start, colon - start));
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  auto number = [&](std::size_t i) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(parts.at(i), &used);
      if (used != parts[i].size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw Error(Errc::BadParams, "bad augmentation argument in '" + std::string(text) + "'");
    }
  };
  AugmentOp op;
  const auto& name = parts.front();
  if (name == "complement" && parts.size() == 1) {
    op.kind = AugmentKind::complement;
  } else if (name == "rot90" && parts.size() == 1) {
    op.kind = AugmentKind::rot90;
  } else if (name == "rot180" && parts.size() == 1) {
    op.kind = AugmentKind::rot180;
  } else if (name == "rot270" && parts.size() == 1) {
    op.kind = AugmentKind::rot270;
  } else if (name == "translate" && parts.size() == 3) {
    op.kind = AugmentKind::translate;
    op.dx = number(1);
    op.dy = number(2);
  } else if (name == "partition" && parts.size() == 3) {
    op.kind = AugmentKind::partition;
    op.rows = number(1);
    op.cols = number(2);
  } else {
    throw Error(Errc::BadParams, "unknown augmentation '" + std::string(text) + "'");
  }
  return op;
}

std::vector<AugmentOp> parse_augment_ops(std::string_view comma_list) {
  std::vector<AugmentOp> ops;
  std::size_t start = 0;
  while (start <= comma_list.size()) {
    const auto comma = comma_list.find(',', start);
    const auto item = comma_list.substr(start, comma - start);
    if (!item.empty()) ops.push_back(parse_augment_op(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return ops;
}

std::string to_string(const AugmentOp& op) {
  switch (op.kind) {
    case AugmentKind::complement: return "complement";
    case AugmentKind::rot90: return "rot90";
    case AugmentKind::rot180: return "rot180";
    case AugmentKind::rot270: return "rot270";
    case AugmentKind::translate: return "translate_" + std::to_string(op.dx) + "_" + std::to_string(op.dy);
    case AugmentKind::partition: return "partition_" + std::to_string(op.rows) + "_" + std::to_string(op.cols);
  }
  return "unknown";
}

std::vector<GrayImage> augment(const GrayImage& img, const AugmentOp& op) {
  const Eigen::Index h = img.height(), w = img.width();
  switch (op.kind) {
    case AugmentKind::complement:
      return {GrayImage{PixelMatrix(img.pixels.unaryExpr([](std::uint8_t v) { return std::uint8_t(255 - v); }))}};
    case AugmentKind::rot90:
      return {GrayImage{PixelMatrix(img.pixels.transpose().rowwise().reverse())}};
    case AugmentKind::rot180:
      return {GrayImage{PixelMatrix(img.pixels.reverse())}};
    case AugmentKind::rot270:
      return {GrayImage{PixelMatrix(img.pixels.transpose().colwise().reverse())}};
    case AugmentKind::translate: {
      if (std::abs(op.dx) >= w || std::abs(op.dy) >= h) throw Error(Errc::BadParams, "translation exceeds image");
      GrayImage out{PixelMatrix::Zero(h, w)};
      for (Eigen::Index y = 0; y < h; ++y)
        for (Eigen::Index x = 0; x < w; ++x) {
          const Eigen::Index sy = y - op.dy, sx = x - op.dx;
          if (sy >= 0 && sy < h && sx >= 0 && sx < w) out.pixels(y, x) = img.pixels(sy, sx);
        }
      return {out};
    }
    case AugmentKind::partition: {
      if (op.rows < 1 || op.cols < 1 || h % op.rows != 0 || w % op.cols != 0) {
        throw Error(Errc::BadParams, "partition grid must divide the image");
      }
      const Eigen::Index th = h / op.rows, tw = w / op.cols;
      std::vector<GrayImage> tiles;
      for (int r = 0; r < op.rows; ++r)
        for (int c = 0; c < op.cols; ++c) tiles.push_back(GrayImage{img.pixels.block(r * th, c * tw, th, tw)});
      return tiles;
    }
  }
  throw Error(Errc::BadParams, "unknown augmentation");
}

FeatureMap image_to_tensor(const GrayImage& img) {
  return FeatureMap::from_plane(img.pixels.cast<double>() / 255.0);
}

}  // namespace ncdnet
