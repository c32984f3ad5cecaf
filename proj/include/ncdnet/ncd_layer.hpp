#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "ncdnet/bytes.hpp"
#include "ncdnet/compressor.hpp"
#include "ncdnet/convnet.hpp"
#include "ncdnet/ncd.hpp"
#include "ncdnet/tensor.hpp"

namespace ncdnet {

inline constexpr double kDefaultCriterion = 0.4;

struct SelectionConfig {
  double criterion = kDefaultCriterion;
  CompressorId compressor{};
  double epsilon = kDefaultNcdEpsilon;
  unsigned threads = 0;
};

struct SelectionResult {
  std::vector<Eigen::Index> kept;  ///< strictly increasing column indices
  DistanceMatrix matrix;
  double criterion_used = kDefaultCriterion;
  bool fallback_applied = false;
};

/// Applies the dissimilarity rule to a finished distance matrix.
///
/// Keeps both members of every pair with d(i, j) > criterion. If none
/// qualify, the criterion becomes the off-diagonal mean and the pass is
/// repeated; if that is empty too, every column is kept. A kept column whose
/// bytes equal an earlier kept column's is dropped. `quantized` may be empty,
/// which disables that byte-level dedupe.
SelectionResult select_from_matrix(DistanceMatrix matrix, double criterion, std::span<const Bytes> quantized = {});

/// Quantizes each column of `columns`, builds their NCD matrix and selects.
SelectionResult select_features(const Eigen::Ref<const Eigen::MatrixXd>& columns, const SelectionConfig& cfg = {});
SelectionResult select_features(const std::vector<Eigen::VectorXd>& columns, const SelectionConfig& cfg = {});

/// Removes exact duplicates, keeping first occurrences in order.
std::vector<Eigen::VectorXd> dedupe(const std::vector<Eigen::VectorXd>& columns);

struct LayerOutput {
  FeatureMap map;  ///< k == selection.kept.size()
  SelectionResult selection;
};

/// Convolution (multi-map form) followed by NCD selection of the per-filter
/// response columns, in place of a pooling layer.
LayerOutput layer_forward(const FeatureMap& input, const ConvLayerSpec<double>& spec, const SelectionConfig& cfg = {});

}  // namespace ncdnet
