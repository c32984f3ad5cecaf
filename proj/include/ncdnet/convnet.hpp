#pragma once

// Deterministic CNN forward primitives: convolution (single image, multi-map,
// separable), activations, dropout, pooling and the pooling gradients.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "ncdnet/error.hpp"
#include "ncdnet/tensor.hpp"

namespace ncdnet {

using Index = Eigen::Index;

enum class Activation { none, sigmoid };
enum class PoolKind { max, mean };

struct ConvParams {
  Index stride = 1;
  Index padding = 0;
  Activation activation = Activation::none;
  double slope = 1.0;  ///< sigmoid slope B
};

/// (W - F + 2P) / S + 1, rejecting non-integral results.
inline Index conv_output_size(Index input, Index filter, Index padding, Index stride) {
  if (input < 1 || filter < 1 || stride < 1 || padding < 0) {
    throw Error(Errc::BadParams, "conv size needs W,F,S >= 1 and P >= 0");
  }
  const Index span = input - filter + 2 * padding;
  if (span < 0) {
    throw Error(Errc::FilterTooLarge, "filter " + std::to_string(filter) + " exceeds padded input " +
                                          std::to_string(input + 2 * padding));
  }
  if (span % stride != 0) {
    throw Error(Errc::NonIntegerOutput, "(" + std::to_string(input) + " - " + std::to_string(filter) +
                                            " + 2*" + std::to_string(padding) + ") is not divisible by stride " +
                                            std::to_string(stride));
  }
  return span / stride + 1;
}

template <typename Scalar>
Scalar sigmoid(Scalar x, Scalar slope = Scalar(1)) {
  const Scalar z = slope * x;
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-z));
  const Scalar e = std::exp(z);
  return e / (Scalar(1) + e);
}

template <typename Scalar>
Scalar activate(Scalar x, const ConvParams& p) {
  return p.activation == Activation::sigmoid ? sigmoid(x, static_cast<Scalar>(p.slope)) : x;
}

/// Filters are K1 x K2 x ch x k (stored as a Tensor4 with filters() == k),
/// one bias per filter. When `map_filters` is nonempty, input map i of a
/// multi-map convolution uses bank i instead of the shared `filters`.
template <typename Scalar>
struct ConvLayerSpec {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Tensor4<Scalar> filters;
  Vector bias;
  ConvParams params;
  std::vector<Tensor4<Scalar>> map_filters;

  ConvLayerSpec(Tensor4<Scalar> f, Vector b, ConvParams p = {}, std::vector<Tensor4<Scalar>> banks = {})
      : filters(std::move(f)), bias(std::move(b)), params(p), map_filters(std::move(banks)) {
    if (bias.size() != filters.filters()) {
      throw Error(Errc::ShapeMismatch, "bias length " + std::to_string(bias.size()) + " != filter count " +
                                           std::to_string(filters.filters()));
    }
    if (params.stride < 1 || params.padding < 0) throw Error(Errc::BadParams, "stride >= 1 and padding >= 0 required");
    for (const auto& bank : map_filters) {
      if (!bank.same_shape(filters)) throw Error(Errc::ShapeMismatch, "per-map filter bank shape differs");
    }
  }

  Index kernel_height() const noexcept { return filters.height(); }
  Index kernel_width() const noexcept { return filters.width(); }
  Index channels() const noexcept { return filters.channels(); }
  Index filter_count() const noexcept { return filters.filters(); }

  /// Output spatial size for an h x w input; throws if not integral.
  std::pair<Index, Index> output_size(Index h, Index w) const {
    return {conv_output_size(h, kernel_height(), params.padding, params.stride),
            conv_output_size(w, kernel_width(), params.padding, params.stride)};
  }
};

namespace detail {

/// Pre-activation response of every filter in `bank` to input map `map`,
/// as an (out_h*out_w) x k matrix (bias included).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> conv_linear(const Tensor4<Scalar>& input, Index map,
                                                                  const Tensor4<Scalar>& bank,
                                                                  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& bias,
                                                                  const ConvParams& p, Index out_h, Index out_w) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Index kh = bank.height(), kw = bank.width(), ch = bank.channels();
  const Index h = input.height(), w = input.width();

  // im2col: patch columns follow the bank's row layout (m*kw + n)*ch + c.
  Matrix patches = Matrix::Zero(out_h * out_w, kh * kw * ch);
  for (Index y = 0; y < out_h; ++y) {
    for (Index x = 0; x < out_w; ++x) {
      const Index row = y * out_w + x;
      for (Index m = 0; m < kh; ++m) {
        const Index iy = y * p.stride + m - p.padding;
        if (iy < 0 || iy >= h) continue;
        for (Index n = 0; n < kw; ++n) {
          const Index ix = x * p.stride + n - p.padding;
          if (ix < 0 || ix >= w) continue;
          for (Index c = 0; c < ch; ++c) patches(row, (m * kw + n) * ch + c) = input(iy, ix, c, map);
        }
      }
    }
  }
  Matrix out = patches * bank.columns();
  out.rowwise() += bias.transpose();
  return out;
}

template <typename Scalar>
void check_channels(const Tensor4<Scalar>& input, const ConvLayerSpec<Scalar>& spec) {
  if (input.channels() != spec.channels()) {
    throw Error(Errc::ShapeMismatch, "input has " + std::to_string(input.channels()) + " channels, filters expect " +
                                         std::to_string(spec.channels()));
  }
}

}  // namespace detail

/// Single-image convolution: out(y,x,f) = f(b_f + sum_{m,n,c} K(m,n,c,f) I(y*s+m-P, x*s+n-P, c)),
/// zero padded. Input must have k == 1; output is out_h x out_w x 1 x k.
template <typename Scalar>
Tensor4<Scalar> conv2d_forward(const Tensor4<Scalar>& input, const ConvLayerSpec<Scalar>& spec) {
  if (input.filters() != 1) {
    throw Error(Errc::ShapeMismatch, "conv2d_forward expects a single image, got " + input.shape());
  }
  detail::check_channels(input, spec);
  const auto [out_h, out_w] = spec.output_size(input.height(), input.width());
  const auto& bank = spec.map_filters.empty() ? spec.filters : spec.map_filters.front();
  auto out = detail::conv_linear(input, 0, bank, spec.bias, spec.params, out_h, out_w);
  const auto& p = spec.params;
  if (p.activation != Activation::none) out = out.unaryExpr([&p](Scalar v) { return activate(v, p); });
  return Tensor4<Scalar>::from_columns(out_h, out_w, 1, std::move(out));
}

/// Multi-map convolution: output filter j sums the activated responses to
/// every input map, out(m, j) = sum_i f(conv(I_i, K_{i,j}) + b_j).
/// With a single input map this is conv2d_forward.
template <typename Scalar>
Tensor4<Scalar> multimap_forward(const Tensor4<Scalar>& input, const ConvLayerSpec<Scalar>& spec) {
  detail::check_channels(input, spec);
  if (!spec.map_filters.empty() && static_cast<Index>(spec.map_filters.size()) != input.filters()) {
    throw Error(Errc::ShapeMismatch, std::to_string(spec.map_filters.size()) + " filter banks for " +
                                         std::to_string(input.filters()) + " input maps");
  }
  const auto [out_h, out_w] = spec.output_size(input.height(), input.width());
  const auto& p = spec.params;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix sum = Matrix::Zero(out_h * out_w, spec.filter_count());
  for (Index i = 0; i < input.filters(); ++i) {
    const auto& bank = spec.map_filters.empty() ? spec.filters : spec.map_filters[static_cast<std::size_t>(i)];
    auto z = detail::conv_linear(input, i, bank, spec.bias, p, out_h, out_w);
    if (p.activation != Activation::none) z = z.unaryExpr([&p](Scalar v) { return activate(v, p); });
    sum += z;
  }
  return Tensor4<Scalar>::from_columns(out_h, out_w, 1, std::move(sum));
}

/// Rank-1 convolution in two 1-D passes: equivalent to conv2d_forward with
/// the kernel K(m,n,c) = col[m] * row[n] for every channel, one output filter.
template <typename Scalar>
Tensor4<Scalar> separable_conv2d(const Tensor4<Scalar>& input, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& col,
                                 const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& row, Scalar bias,
                                 const ConvParams& p) {
  if (input.filters() != 1) throw Error(Errc::ShapeMismatch, "separable_conv2d expects a single image");
  if (col.size() < 1 || row.size() < 1) throw Error(Errc::ShapeMismatch, "separable filters must be nonempty");
  const Index kh = col.size(), kw = row.size();
  const Index out_h = conv_output_size(input.height(), kh, p.padding, p.stride);
  const Index out_w = conv_output_size(input.width(), kw, p.padding, p.stride);
  const Index h = input.height(), w = input.width();

  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix out = Matrix::Constant(out_h, out_w, bias);
  Matrix vertical(out_h, w);
  for (Index c = 0; c < input.channels(); ++c) {
    vertical.setZero();
    for (Index y = 0; y < out_h; ++y)
      for (Index m = 0; m < kh; ++m) {
        const Index iy = y * p.stride + m - p.padding;
        if (iy < 0 || iy >= h) continue;
        for (Index x = 0; x < w; ++x) vertical(y, x) += col[m] * input(iy, x, c, 0);
      }
    for (Index y = 0; y < out_h; ++y)
      for (Index x = 0; x < out_w; ++x)
        for (Index n = 0; n < kw; ++n) {
          const Index ix = x * p.stride + n - p.padding;
          if (ix >= 0 && ix < w) out(y, x) += row[n] * vertical(y, ix);
        }
  }
  if (p.activation != Activation::none) out = out.unaryExpr([&p](Scalar v) { return activate(v, p); });
  return Tensor4<Scalar>::from_plane(out);
}

template <typename Derived>
typename Derived::PlainObject softmax(const Eigen::MatrixBase<Derived>& v) {
  if (v.size() == 0) throw Error(Errc::BadParams, "softmax of an empty vector");
  typename Derived::PlainObject e = (v.array() - v.maxCoeff()).exp().matrix();
  return e / e.sum();
}

/// Inverted dropout: in training each element is zeroed with probability
/// `rate` and survivors scale by 1/(1 - rate); inference is the identity.
template <typename Derived>
typename Derived::PlainObject dropout_mask(const Eigen::MatrixBase<Derived>& v, double rate, std::uint64_t seed,
                                           bool training) {
  if (!(rate >= 0.0 && rate < 1.0)) throw Error(Errc::BadRate, "dropout rate must be in [0, 1)");
  typename Derived::PlainObject out = v;
  if (!training || rate == 0.0) return out;
  using Scalar = typename Derived::Scalar;
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution drop(rate);
  const Scalar keep_scale = static_cast<Scalar>(1.0 / (1.0 - rate));
  for (Index i = 0; i < out.size(); ++i) out(i) = drop(rng) ? Scalar(0) : out(i) * keep_scale;
  return out;
}

namespace detail {

template <typename Scalar, typename Visit>
void for_each_window(const Tensor4<Scalar>& input, Index window, Index stride, Visit&& visit) {
  if (window < 1) throw Error(Errc::BadWindow, "pool window must be >= 1");
  const Index out_h = conv_output_size(input.height(), window, 0, stride);
  const Index out_w = conv_output_size(input.width(), window, 0, stride);
  for (Index f = 0; f < input.filters(); ++f)
    for (Index c = 0; c < input.channels(); ++c)
      for (Index y = 0; y < out_h; ++y)
        for (Index x = 0; x < out_w; ++x) visit(y, x, c, f, y * stride, x * stride);
}

template <typename Scalar>
Tensor4<Scalar> pool(const Tensor4<Scalar>& input, Index window, Index stride, PoolKind kind) {
  if (window < 1) throw Error(Errc::BadWindow, "pool window must be >= 1");
  Tensor4<Scalar> out(conv_output_size(input.height(), window, 0, stride),
                      conv_output_size(input.width(), window, 0, stride), input.channels(), input.filters());
  for_each_window(input, window, stride, [&](Index y, Index x, Index c, Index f, Index y0, Index x0) {
    Scalar acc = kind == PoolKind::max ? input(y0, x0, c, f) : Scalar(0);
    for (Index dy = 0; dy < window; ++dy)
      for (Index dx = 0; dx < window; ++dx) {
        const Scalar v = input(y0 + dy, x0 + dx, c, f);
        if (kind == PoolKind::max) {
          if (v > acc) acc = v;
        } else {
          acc += v;
        }
      }
    out(y, x, c, f) = kind == PoolKind::max ? acc : acc / static_cast<Scalar>(window * window);
  });
  return out;
}

}  // namespace detail

template <typename Scalar>
Tensor4<Scalar> max_pool(const Tensor4<Scalar>& input, Index window, Index stride) {
  return detail::pool(input, window, stride, PoolKind::max);
}

template <typename Scalar>
Tensor4<Scalar> mean_pool(const Tensor4<Scalar>& input, Index window, Index stride) {
  return detail::pool(input, window, stride, PoolKind::mean);
}

/// d(sum of pooled outputs)/d(input). Mean: 1/m per window cell. Max: 1 at
/// the window argmax, first cell in row-major order on ties. Overlapping
/// windows accumulate.
template <typename Scalar>
Tensor4<Scalar> pool_gradient(const Tensor4<Scalar>& input, PoolKind kind, Index window, Index stride) {
  if (window < 1) throw Error(Errc::BadWindow, "pool window must be >= 1");
  Tensor4<Scalar> grad(input.height(), input.width(), input.channels(), input.filters());
  const Scalar share = Scalar(1) / static_cast<Scalar>(window * window);
  detail::for_each_window(input, window, stride, [&](Index, Index, Index c, Index f, Index y0, Index x0) {
    if (kind == PoolKind::mean) {
      for (Index dy = 0; dy < window; ++dy)
        for (Index dx = 0; dx < window; ++dx) grad(y0 + dy, x0 + dx, c, f) += share;
      return;
    }
    Index by = y0, bx = x0;
    for (Index dy = 0; dy < window; ++dy)
      for (Index dx = 0; dx < window; ++dx)
        if (input(y0 + dy, x0 + dx, c, f) > input(by, bx, c, f)) {
          by = y0 + dy;
          bx = x0 + dx;
        }
    grad(by, bx, c, f) += Scalar(1);
  });
  return grad;
}

}  // namespace ncdnet
