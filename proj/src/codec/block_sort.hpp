#pragma once

#include <cstddef>

#include "ncdnet/bytes.hpp"

namespace ncdnet::codec {

/// Burrows-Wheeler transform over x plus an implicit end marker that sorts
/// below every byte. `last` holds the n bytes of the last column with the
/// marker removed; `marker_row` is where it was.
struct BwtResult {
  Bytes last;
  std::size_t marker_row = 0;
};

BwtResult bwt_forward(ByteView x);
Bytes bwt_inverse(ByteView last, std::size_t marker_row);

Bytes mtf_encode(ByteView x);
Bytes mtf_decode(ByteView ranks);

Bytes block_sort_compress(ByteView x);
Bytes block_sort_decompress(ByteView y);

}  // namespace ncdnet::codec
