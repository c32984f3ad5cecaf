#pragma once

// Lightweight deterministic classifiers used to compare feature sets:
// nearest centroid and one-vs-rest linear hinge-loss models.

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace ncdnet {

struct LabeledSet {
  std::vector<Eigen::VectorXd> items;
  std::vector<int> labels;
  std::vector<int> classes;  ///< sorted; each must have at least one item

  /// Derives `classes` from the labels present.
  static LabeledSet from(std::vector<Eigen::VectorXd> items, std::vector<int> labels);

  /// Throws EmptyClass for a listed class without items, BadParams for an
  /// unlisted label, LengthMismatch for ragged vectors.
  void validate() const;
  Eigen::Index dimension() const { return items.empty() ? 0 : items.front().size(); }
};

struct CentroidModel {
  std::vector<int> classes;
  Eigen::MatrixXd centroids;  ///< one row per class
};

CentroidModel centroid_train(const LabeledSet& set);
/// Nearest centroid by Euclidean distance; ties go to the lowest label.
int centroid_predict(const CentroidModel& model, const Eigen::Ref<const Eigen::VectorXd>& v);

struct HingeModel {
  std::vector<int> classes;
  Eigen::MatrixXd weights;  ///< one row per class
  Eigen::VectorXd bias;
};

/// One-vs-rest linear models trained by stochastic subgradient descent on
/// the L2-regularized hinge loss; sample order is shuffled per epoch from
/// `seed`.
HingeModel hinge_train(const LabeledSet& set, int epochs, double rate, std::uint64_t seed, double l2 = 1e-4);
/// Class with the largest margin; ties go to the lowest label.
int hinge_predict(const HingeModel& model, const Eigen::Ref<const Eigen::VectorXd>& v);

/// Per-dimension z-scoring fitted on a training set (unit scale for
/// constant dimensions).
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Standardizer fit(const LabeledSet& set);
  Eigen::VectorXd apply(const Eigen::Ref<const Eigen::VectorXd>& v) const;
  LabeledSet apply(const LabeledSet& set) const;
};

template <typename Predict>
double accuracy(const LabeledSet& set, Predict&& predict) {
  if (set.items.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < set.items.size(); ++i) hits += predict(set.items[i]) == set.labels[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(set.items.size());
}

}  // namespace ncdnet
