#pragma once

#include <string>

#include <Eigen/Core>

#include "ncdnet/error.hpp"

namespace ncdnet {

/// Dense h x w x ch x k tensor. Storage is a (h*w*ch) x k matrix, so column f
/// is the flattened response of filter f; element (y, x, c, f) lives at row
/// (y*w + x)*ch + c.
template <typename Scalar>
class Tensor4 {
 public:
  using Index = Eigen::Index;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Tensor4() = default;

  Tensor4(Index h, Index w, Index ch, Index k) : h_(h), w_(w), ch_(ch) {
    if (h < 1 || w < 1 || ch < 1 || k < 1) {
      throw Error(Errc::ShapeMismatch, "tensor dimensions must be >= 1, got " + shape_string(h, w, ch, k));
    }
    data_ = Matrix::Zero(h * w * ch, k);
  }

  static Tensor4 from_columns(Index h, Index w, Index ch, Matrix columns) {
    Tensor4 t(h, w, ch, columns.cols() == 0 ? 1 : columns.cols());
    if (columns.rows() != h * w * ch || columns.cols() == 0) {
      throw Error(Errc::ShapeMismatch, "column matrix " + std::to_string(columns.rows()) + "x" +
                                           std::to_string(columns.cols()) + " does not fit " +
                                           shape_string(h, w, ch, columns.cols()));
    }
    t.data_ = std::move(columns);
    return t;
  }

  /// Single-filter tensor from an h x w matrix (ch = k = 1).
  static Tensor4 from_plane(const Matrix& plane) {
    Tensor4 t(plane.rows(), plane.cols(), 1, 1);
    for (Index y = 0; y < plane.rows(); ++y)
      for (Index x = 0; x < plane.cols(); ++x) t(y, x, 0, 0) = plane(y, x);
    return t;
  }

  Index height() const noexcept { return h_; }
  Index width() const noexcept { return w_; }
  Index channels() const noexcept { return ch_; }
  Index filters() const noexcept { return data_.cols(); }
  Index size() const noexcept { return data_.size(); }

  Scalar& operator()(Index y, Index x, Index c, Index f) { return data_((y * w_ + x) * ch_ + c, f); }
  Scalar operator()(Index y, Index x, Index c, Index f) const { return data_((y * w_ + x) * ch_ + c, f); }

  const Matrix& columns() const noexcept { return data_; }
  Matrix& columns() noexcept { return data_; }

  /// h x w slice for one (channel, filter).
  Matrix plane(Index c, Index f) const {
    Matrix p(h_, w_);
    for (Index y = 0; y < h_; ++y)
      for (Index x = 0; x < w_; ++x) p(y, x) = (*this)(y, x, c, f);
    return p;
  }

  bool same_shape(const Tensor4& o) const noexcept {
    return h_ == o.h_ && w_ == o.w_ && ch_ == o.ch_ && filters() == o.filters();
  }

  std::string shape() const { return shape_string(h_, w_, ch_, filters()); }

  static std::string shape_string(Index h, Index w, Index ch, Index k) {
    return std::to_string(h) + "x" + std::to_string(w) + "x" + std::to_string(ch) + "x" + std::to_string(k);
  }

 private:
  Index h_ = 0;
  Index w_ = 0;
  Index ch_ = 0;
  Matrix data_;
};

using FeatureMap = Tensor4<double>;

}  // namespace ncdnet
