#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "ncdnet/bytes.hpp"

namespace ncdnet {

enum class CompressorKind { block_sorting, deflate_like, run_length };

/// Codec selection plus the largest input it accepts. Inputs beyond the
/// block capacity are rejected rather than windowed.
struct CompressorId {
  CompressorKind kind = CompressorKind::block_sorting;
  std::size_t block_capacity = kDefaultBlockCapacity;

  friend bool operator==(const CompressorId&, const CompressorId&) = default;
};

/// Accepts the CLI names `bzip`, `deflate`, `rle` (and the kind names).
CompressorId parse_compressor(std::string_view name);
std::string_view compressor_name(CompressorKind kind) noexcept;

Bytes compress(ByteView x, const CompressorId& c = {});
Bytes decompress(ByteView y, const CompressorId& c = {});

/// C(x), the compressed length in bytes including the stream header.
std::size_t compressed_len(ByteView x, const CompressorId& c = {});

}  // namespace ncdnet
