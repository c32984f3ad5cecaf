#pragma once

// Adaptive binary range coder with 12-bit probabilities (LZMA layout).

#include <cstdint>

#include "ncdnet/bytes.hpp"
#include "ncdnet/error.hpp"

namespace ncdnet::codec {

inline constexpr int kProbBits = 12;
inline constexpr std::uint16_t kProbInit = 1u << (kProbBits - 1);
inline constexpr int kAdaptShift = 4;

using Prob = std::uint16_t;

class RangeEncoder {
 public:
  explicit RangeEncoder(Bytes& out) : out_(out) {}

  void encode(Prob& p, int bit) {
    const std::uint32_t bound = (range_ >> kProbBits) * p;
    if (bit == 0) {
      range_ = bound;
      p += ((1u << kProbBits) - p) >> kAdaptShift;
    } else {
      low_ += bound;
      range_ -= bound;
      p -= p >> kAdaptShift;
    }
    while (range_ < (1u << 24)) {
      range_ <<= 8;
      shift_low();
    }
  }

  void flush() {
    for (int i = 0; i < 5; ++i) shift_low();
  }

 private:
  void shift_low() {
    if (static_cast<std::uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
      const auto carry = static_cast<std::uint8_t>(low_ >> 32);
      std::uint8_t temp = cache_;
      do {
        out_.push_back(static_cast<std::uint8_t>(temp + carry));
        temp = 0xFF;
      } while (--cache_size_ != 0);
      cache_ = static_cast<std::uint8_t>(low_ >> 24);
    }
    ++cache_size_;
    low_ = (low_ & 0x00FFFFFFu) << 8;
  }

  Bytes& out_;
  std::uint64_t low_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint8_t cache_ = 0;
  std::uint64_t cache_size_ = 1;
};

class RangeDecoder {
 public:
  RangeDecoder(ByteView in, std::size_t pos) : in_(in), pos_(pos) {
    if (next() != 0) throw Error(Errc::CorruptStream, "bad range coder preamble");
    for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next();
  }

  int decode(Prob& p) {
    const std::uint32_t bound = (range_ >> kProbBits) * p;
    int bit;
    if (code_ < bound) {
      range_ = bound;
      p += ((1u << kProbBits) - p) >> kAdaptShift;
      bit = 0;
    } else {
      code_ -= bound;
      range_ -= bound;
      p -= p >> kAdaptShift;
      bit = 1;
    }
    while (range_ < (1u << 24)) {
      range_ <<= 8;
      code_ = (code_ << 8) | next();
    }
    return bit;
  }

 private:
  std::uint32_t next() {
    if (pos_ >= in_.size()) throw Error(Errc::CorruptStream, "range coder ran past end of stream");
    return in_[pos_++];
  }

  ByteView in_;
  std::size_t pos_;
  std::uint32_t code_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
};

}  // namespace ncdnet::codec
