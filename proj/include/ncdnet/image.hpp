#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "ncdnet/tensor.hpp"

namespace ncdnet {

using PixelMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct GrayImage {
  PixelMatrix pixels;

  Eigen::Index height() const noexcept { return pixels.rows(); }
  Eigen::Index width() const noexcept { return pixels.cols(); }

  friend bool operator==(const GrayImage& a, const GrayImage& b) {
    return a.pixels.rows() == b.pixels.rows() && a.pixels.cols() == b.pixels.cols() && a.pixels == b.pixels;
  }
};

/// Decodes P2 (ASCII) or P5 (binary) PGM. Samples are rescaled to 0..255
/// when maxval differs.
GrayImage decode_pgm(std::string_view data);
GrayImage load_image(const std::filesystem::path& path);

std::string encode_pgm(const GrayImage& img, bool binary = true);
void save_pgm(const std::filesystem::path& path, const GrayImage& img);

/// round(0.299 r + 0.587 g + 0.114 b)
GrayImage to_grayscale(const PixelMatrix& r, const PixelMatrix& g, const PixelMatrix& b);

/// Median over a window x window neighbourhood with replicated borders.
GrayImage median_denoise(const GrayImage& img, int window = 3);

enum class AugmentKind { complement, rot90, rot180, rot270, translate, partition };

struct AugmentOp {
  AugmentKind kind = AugmentKind::complement;
  int dx = 0;  ///< translate: columns shifted right
  int dy = 0;  ///< translate: rows shifted down
  int rows = 1;  ///< partition grid
  int cols = 1;
};

/// Parses `complement`, `rot90`, `rot180`, `rot270`, `translate:DX:DY`,
/// `partition:R:C`.
AugmentOp parse_augment_op(std::string_view text);
std::vector<AugmentOp> parse_augment_ops(std::string_view comma_list);
std::string to_string(const AugmentOp& op);

/// One image for every op except partition, which yields R*C tiles in
/// row-major order. rot90 is a clockwise quarter turn; translation fills
/// with zeros.
std::vector<GrayImage> augment(const GrayImage& img, const AugmentOp& op);

/// Pixels scaled to [0, 1] as an h x w x 1 x 1 tensor.
FeatureMap image_to_tensor(const GrayImage& img);

}  // namespace ncdnet
