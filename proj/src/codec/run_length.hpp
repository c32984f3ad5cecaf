#pragma once

#include "ncdnet/bytes.hpp"

namespace ncdnet::codec {

Bytes run_length_compress(ByteView x);
Bytes run_length_decompress(ByteView y);

Bytes deflate_compress(ByteView x);
Bytes deflate_decompress(ByteView y);

}  // namespace ncdnet::codec
