#include <zlib.h>

#include <cstdint>

#include "ncdnet/error.hpp"
#include "run_length.hpp"
#include "varint.hpp"

namespace ncdnet::codec {
namespace {
constexpr std::uint8_t kMagic = 0x44;
}

// Stream layout: magic, varint n, zlib stream (omitted when n == 0).
Bytes deflate_compress(ByteView x) {
  Bytes out{kMagic};
  put_varint(out, x.size());
  if (x.empty()) return out;

  const std::size_t header = out.size();
  uLongf bound = compressBound(static_cast<uLong>(x.size()));
  out.resize(header + bound);
  const int rc = compress2(out.data() + header, &bound, x.data(), static_cast<uLong>(x.size()),
                           Z_BEST_COMPRESSION);
  if (rc != Z_OK) throw Error(Errc::CorruptStream, "zlib compress2 failed");
  out.resize(header + bound);
  return out;
}

Bytes deflate_decompress(ByteView y) {
  std::size_t pos = 0;
  if (y.empty() || y[pos++] != kMagic) throw Error(Errc::CorruptStream, "not a deflate stream");
  const std::uint64_t n = get_varint(y, pos);
  if (n == 0) {
    if (pos != y.size()) throw Error(Errc::CorruptStream, "trailing bytes after empty stream");
    return {};
  }
  if (n > y.size() * 1032ull) throw Error(Errc::CorruptStream, "implausible length");

  Bytes out(n);
  uLongf produced = static_cast<uLongf>(n);
  const int rc = uncompress(out.data(), &produced, y.data() + pos, static_cast<uLong>(y.size() - pos));
  if (rc != Z_OK || produced != n) throw Error(Errc::CorruptStream, "zlib stream is malformed");
  return out;
}

}  // namespace ncdnet::codec
