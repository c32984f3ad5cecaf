#include "ncdnet/compressor.hpp"

#include <cmath>
#include <string>

#include "codec/block_sort.hpp"
#include "codec/run_length.hpp"
#include "ncdnet/error.hpp"

namespace ncdnet {

Bytes concat(ByteView x, ByteView y, std::size_t capacity) {
  if (x.size() + y.size() > capacity) {
    throw Error(Errc::InputTooLarge, "concatenation of " + std::to_string(x.size()) + " + " +
                                         std::to_string(y.size()) + " bytes exceeds capacity " +
                                         std::to_string(capacity));
  }
  Bytes out;
  out.reserve(x.size() + y.size());
  out.insert(out.end(), x.begin(), x.end());
  out.insert(out.end(), y.begin(), y.end());
  return out;
}

Bytes quantize_features(const Eigen::Ref<const Eigen::VectorXd>& v) {
  Bytes out(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    double e = v[i];
    if (std::isnan(e)) e = 0.0;
    e = e < 0.0 ? 0.0 : (e > 1.0 ? 1.0 : e);
    out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(std::floor(255.0 * e + 0.5));
  }
  return out;
}

CompressorId parse_compressor(std::string_view name) {
  CompressorId id;
  if (name == "bzip" || name == "block_sorting") {
    id.kind = CompressorKind::block_sorting;
  } else if (name == "deflate" || name == "deflate_like") {
    id.kind = CompressorKind::deflate_like;
  } else if (name == "rle" || name == "run_length") {
    id.kind = CompressorKind::run_length;
  } else {
    throw Error(Errc::BadParams, "unknown compressor '" + std::string(name) + "'");
  }
  return id;
}

std::string_view compressor_name(CompressorKind kind) noexcept {
  switch (kind) {
    case CompressorKind::block_sorting: return "bzip";
    case CompressorKind::deflate_like: return "deflate";
    case CompressorKind::run_length: return "rle";
  }
  return "unknown";
}

namespace {
void check_capacity(ByteView x, const CompressorId& c) {
  if (x.size() > c.block_capacity) {
    throw Error(Errc::InputTooLarge, std::to_string(x.size()) + " bytes exceeds block capacity " +
                                         std::to_string(c.block_capacity));
  }
}
}  // namespace

Bytes compress(ByteView x, const CompressorId& c) {
  check_capacity(x, c);
  switch (c.kind) {
    case CompressorKind::block_sorting: return codec::block_sort_compress(x);
    case CompressorKind::deflate_like: return codec::deflate_compress(x);
    case CompressorKind::run_length: return codec::run_length_compress(x);
  }
  throw Error(Errc::BadParams, "unknown compressor kind");
}

Bytes decompress(ByteView y, const CompressorId& c) {
  switch (c.kind) {
    case CompressorKind::block_sorting: return codec::block_sort_decompress(y);
    case CompressorKind::deflate_like: return codec::deflate_decompress(y);
    case CompressorKind::run_length: return codec::run_length_decompress(y);
  }
  throw Error(Errc::BadParams, "unknown compressor kind");
}

std::size_t compressed_len(ByteView x, const CompressorId& c) { return compress(x, c).size(); }

}  // namespace ncdnet
