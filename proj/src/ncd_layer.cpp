#include "ncdnet/ncd_layer.hpp"

#include <set>
#include <string>

#include "ncdnet/error.hpp"

namespace ncdnet {
namespace {

std::vector<Eigen::Index> members_above(const DistanceMatrix& m, double criterion, std::span<const Bytes> quantized) {
  const auto n = m.size();
  std::vector<bool> hit(static_cast<std::size_t>(n), false);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (m(i, j) > criterion) hit[static_cast<std::size_t>(i)] = hit[static_cast<std::size_t>(j)] = true;

  std::vector<Eigen::Index> kept;
  std::set<Bytes> seen;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!hit[static_cast<std::size_t>(i)]) continue;
    if (!quantized.empty() && !seen.insert(quantized[static_cast<std::size_t>(i)]).second) continue;
    kept.push_back(i);
  }
  return kept;
}

}  // namespace

SelectionResult select_from_matrix(DistanceMatrix matrix, double criterion, std::span<const Bytes> quantized) {
  if (!quantized.empty() && static_cast<Eigen::Index>(quantized.size()) != matrix.size()) {
    throw Error(Errc::LengthMismatch, "quantized column count does not match matrix size");
  }
  SelectionResult result{{}, std::move(matrix), criterion, false};
  const auto n = result.matrix.size();
  if (n == 1) {
    result.kept = {0};
    return result;
  }

  result.kept = members_above(result.matrix, criterion, quantized);
  if (!result.kept.empty()) return result;

  result.fallback_applied = true;
  result.criterion_used = offdiag_mean(result.matrix);
  result.kept = members_above(result.matrix, result.criterion_used, quantized);
  if (result.kept.empty()) {
    result.kept.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) result.kept[static_cast<std::size_t>(i)] = i;
  }
  return result;
}

SelectionResult select_features(const Eigen::Ref<const Eigen::MatrixXd>& columns, const SelectionConfig& cfg) {
  if (columns.cols() < 1) throw Error(Errc::TooSmall, "selection needs at least one column");
  std::vector<Bytes> quantized;
  quantized.reserve(static_cast<std::size_t>(columns.cols()));
  for (Eigen::Index j = 0; j < columns.cols(); ++j) quantized.push_back(quantize_features(columns.col(j)));
  auto matrix = distance_matrix(quantized, {cfg.compressor, cfg.epsilon, cfg.threads});
  return select_from_matrix(std::move(matrix), cfg.criterion, quantized);
}

SelectionResult select_features(const std::vector<Eigen::VectorXd>& columns, const SelectionConfig& cfg) {
  if (columns.empty()) throw Error(Errc::TooSmall, "selection needs at least one column");
  Eigen::MatrixXd m(columns.front().size(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j].size() != m.rows()) {
      throw Error(Errc::LengthMismatch, "column " + std::to_string(j) + " has length " +
                                            std::to_string(columns[j].size()) + ", expected " +
                                            std::to_string(m.rows()));
    }
    m.col(static_cast<Eigen::Index>(j)) = columns[j];
  }
  return select_features(m, cfg);
}

std::vector<Eigen::VectorXd> dedupe(const std::vector<Eigen::VectorXd>& columns) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& v : columns) {
    bool duplicate = false;
    for (const auto& u : out) {
      if (u.size() == v.size() && u == v) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) out.push_back(v);
  }
  return out;
}

LayerOutput layer_forward(const FeatureMap& input, const ConvLayerSpec<double>& spec, const SelectionConfig& cfg) {
  auto conv = multimap_forward(input, spec);
  auto selection = select_features(conv.columns(), cfg);
  Eigen::MatrixXd kept(conv.columns().rows(), static_cast<Eigen::Index>(selection.kept.size()));
  for (std::size_t j = 0; j < selection.kept.size(); ++j) {
    kept.col(static_cast<Eigen::Index>(j)) = conv.columns().col(selection.kept[j]);
  }
  return {FeatureMap::from_columns(conv.height(), conv.width(), conv.channels(), std::move(kept)),
          std::move(selection)};
}

}  // namespace ncdnet
