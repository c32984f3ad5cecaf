#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace ncdnet {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline constexpr std::size_t kDefaultBlockCapacity = 900'000;

/// y appended after x. Throws InputTooLarge if the result exceeds `capacity`.
Bytes concat(ByteView x, ByteView y, std::size_t capacity = kDefaultBlockCapacity);

/// Maps activations to bytes: round(255 * clamp(e, 0, 1)), halves rounded up.
/// NaN maps to 0.
Bytes quantize_features(const Eigen::Ref<const Eigen::VectorXd>& v);

inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

}  // namespace ncdnet
