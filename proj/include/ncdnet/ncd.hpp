#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "ncdnet/bytes.hpp"
#include "ncdnet/compressor.hpp"

namespace ncdnet {

inline constexpr double kDefaultNcdEpsilon = 0.1;

/// Square matrix of pairwise compression distances.
///
/// Construction validates the invariants: zero diagonal and exact symmetry,
/// every entry in [0, 1 + epsilon]. Violations throw InvalidMatrix.
class DistanceMatrix {
 public:
  explicit DistanceMatrix(Eigen::MatrixXd d, double epsilon = kDefaultNcdEpsilon);

  Eigen::Index size() const noexcept { return d_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return d_(i, j); }
  const Eigen::MatrixXd& matrix() const noexcept { return d_; }
  double epsilon() const noexcept { return epsilon_; }

 private:
  Eigen::MatrixXd d_;
  double epsilon_;
};

/// (C(xy) - min(C(x), C(y))) / max(C(x), C(y)) from compressed lengths.
double ncd_from_lengths(double cx, double cy, double cxy);

/// Vector-space form 1 - (C(X) + C(Y) - C(XY)) / max(C(X), C(Y)); algebraically
/// identical to ncd_from_lengths.
double ncd_vector_form(double cx, double cy, double cxy);

/// NCD with the joint length taken as min(C(x||y), C(y||x)), so the result is
/// exactly symmetric. Negative raw values clip to 0.
double ncd_bytes(ByteView x, ByteView y, const CompressorId& c = {});

/// NCD of two activation vectors after quantize_features.
double ncd_vectors(const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y, const CompressorId& c = {});

struct DistanceOptions {
  CompressorId compressor{};
  double epsilon = kDefaultNcdEpsilon;
  /// 0 selects std::thread::hardware_concurrency().
  unsigned threads = 0;
};

/// Pairwise NCD over byte items. Pairs are evaluated concurrently; the
/// diagonal is 0 by convention. Element errors are rethrown with the pair
/// indices in the message.
DistanceMatrix distance_matrix(const std::vector<Bytes>& items, const DistanceOptions& opts = {});

/// Same, over the columns of `features` (each column one feature vector).
DistanceMatrix distance_matrix(const Eigen::Ref<const Eigen::MatrixXd>& features,
                               const DistanceOptions& opts = {});

/// Mean of the n(n-1)/2 upper-triangle entries. Entries are summed in sorted
/// order so the result does not depend on item order.
double offdiag_mean(const DistanceMatrix& m);

}  // namespace ncdnet
