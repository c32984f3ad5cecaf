#include "run_length.hpp"

#include <algorithm>
#include <cstdint>

#include "ncdnet/error.hpp"
#include "varint.hpp"

namespace ncdnet::codec {
namespace {

constexpr std::uint8_t kMagic = 0x52;
constexpr std::size_t kMinRepeat = 3;
constexpr std::size_t kMaxRepeat = 130;
constexpr std::size_t kMaxLiteral = 128;

}  // namespace

// PackBits-style: control 0..127 = (c+1) literal bytes follow,
// 128..255 = next byte repeated (c - 125) times.
Bytes run_length_compress(ByteView x) {
  Bytes out{kMagic};
  put_varint(out, x.size());

  std::size_t i = 0;
  std::size_t literal_start = 0;
  auto flush_literals = [&](std::size_t end) {
    while (literal_start < end) {
      const std::size_t len = std::min(kMaxLiteral, end - literal_start);
      out.push_back(static_cast<std::uint8_t>(len - 1));
      out.insert(out.end(), x.begin() + literal_start, x.begin() + literal_start + len);
      literal_start += len;
    }
  };

  while (i < x.size()) {
    std::size_t run = 1;
    while (i + run < x.size() && run < kMaxRepeat && x[i + run] == x[i]) ++run;
    if (run >= kMinRepeat) {
      flush_literals(i);
      out.push_back(static_cast<std::uint8_t>(run + 125));
      out.push_back(x[i]);
      i += run;
      literal_start = i;
    } else {
      i += run;
    }
  }
  flush_literals(x.size());
  return out;
}

Bytes run_length_decompress(ByteView y) {
  std::size_t pos = 0;
  if (y.empty() || y[pos++] != kMagic) throw Error(Errc::CorruptStream, "not a run-length stream");
  const std::uint64_t n = get_varint(y, pos);
  if (n > y.size() * kMaxRepeat) throw Error(Errc::CorruptStream, "implausible length");

  Bytes out;
  out.reserve(n);
  while (pos < y.size()) {
    const std::uint8_t control = y[pos++];
    if (control < 128) {
      const std::size_t len = control + 1u;
      if (pos + len > y.size()) throw Error(Errc::CorruptStream, "truncated literal block");
      out.insert(out.end(), y.begin() + pos, y.begin() + pos + len);
      pos += len;
    } else {
      if (pos >= y.size()) throw Error(Errc::CorruptStream, "truncated repeat block");
      out.insert(out.end(), control - 125u, y[pos++]);
    }
    if (out.size() > n) throw Error(Errc::CorruptStream, "output exceeds declared length");
  }
  if (out.size() != n) throw Error(Errc::CorruptStream, "output shorter than declared length");
  return out;
}

}  // namespace ncdnet::codec
