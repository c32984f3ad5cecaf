#include "ncdnet/classify.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "ncdnet/error.hpp"

namespace ncdnet {

LabeledSet LabeledSet::from(std::vector<Eigen::VectorXd> items, std::vector<int> labels) {
  LabeledSet set{std::move(items), std::move(labels), {}};
  set.classes = set.labels;
  std::sort(set.classes.begin(), set.classes.end());
  set.classes.erase(std::unique(set.classes.begin(), set.classes.end()), set.classes.end());
  return set;
}

void LabeledSet::validate() const {
  if (items.size() != labels.size()) throw Error(Errc::LengthMismatch, "items and labels differ in count");
  for (const auto& v : items)
    if (v.size() != dimension()) throw Error(Errc::LengthMismatch, "feature vectors differ in length");
  for (int l : labels)
    if (!std::binary_search(classes.begin(), classes.end(), l)) {
      throw Error(Errc::BadParams, "label " + std::to_string(l) + " is not a listed class");
    }
  for (int c : classes)
    if (std::find(labels.begin(), labels.end(), c) == labels.end()) {
      throw Error(Errc::EmptyClass, "class " + std::to_string(c) + " has no items");
    }
}

CentroidModel centroid_train(const LabeledSet& set) {
  if (set.classes.empty()) throw Error(Errc::EmptyClass, "no classes to train");
  set.validate();
  CentroidModel model{set.classes, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(set.classes.size()), set.dimension())};
  std::vector<int> counts(set.classes.size(), 0);
  for (std::size_t i = 0; i < set.items.size(); ++i) {
    const auto c = std::lower_bound(set.classes.begin(), set.classes.end(), set.labels[i]) - set.classes.begin();
    model.centroids.row(c) += set.items[i].transpose();
    ++counts[static_cast<std::size_t>(c)];
  }
  for (std::size_t c = 0; c < counts.size(); ++c) model.centroids.row(static_cast<Eigen::Index>(c)) /= counts[c];
  return model;
}

int centroid_predict(const CentroidModel& model, const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (v.size() != model.centroids.cols()) throw Error(Errc::LengthMismatch, "query dimension differs from model");
  int best = model.classes.front();
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < model.classes.size(); ++c) {
    const double d = (model.centroids.row(static_cast<Eigen::Index>(c)).transpose() - v).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = model.classes[c];
    }
  }
  return best;
}

HingeModel hinge_train(const LabeledSet& set, int epochs, double rate, std::uint64_t seed, double l2) {
  if (set.classes.size() < 2) throw Error(Errc::DegenerateData, "hinge training needs at least two classes");
  try {
    set.validate();
  } catch (const Error& e) {
    if (e.code() == Errc::EmptyClass) throw Error(Errc::DegenerateData, e.what());
    throw;
  }
  if (epochs < 1 || !(rate > 0.0)) throw Error(Errc::BadParams, "epochs >= 1 and rate > 0 required");

  const auto classes = static_cast<Eigen::Index>(set.classes.size());
  HingeModel model{set.classes, Eigen::MatrixXd::Zero(classes, set.dimension()), Eigen::VectorXd::Zero(classes)};
  std::vector<std::size_t> order(set.items.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);

  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (auto i : order) {
      const auto& x = set.items[i];
      for (Eigen::Index c = 0; c < classes; ++c) {
        const double y = set.labels[i] == set.classes[static_cast<std::size_t>(c)] ? 1.0 : -1.0;
        const double margin = y * (model.weights.row(c).dot(x) + model.bias[c]);
        model.weights.row(c) *= (1.0 - rate * l2);
        if (margin < 1.0) {
          model.weights.row(c) += rate * y * x.transpose();
          model.bias[c] += rate * y;
        }
      }
    }
  }
  return model;
}

int hinge_predict(const HingeModel& model, const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (v.size() != model.weights.cols()) throw Error(Errc::LengthMismatch, "query dimension differs from model");
  const Eigen::VectorXd scores = model.weights * v + model.bias;
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < scores.size(); ++c)
    if (scores[c] > scores[best]) best = c;
  return model.classes[static_cast<std::size_t>(best)];
}

Standardizer Standardizer::fit(const LabeledSet& set) {
  if (set.items.empty()) throw Error(Errc::TooSmall, "cannot standardize an empty set");
  const auto d = set.dimension();
  Standardizer s{Eigen::VectorXd::Zero(d), Eigen::VectorXd::Zero(d)};
  for (const auto& v : set.items) s.mean += v;
  s.mean /= static_cast<double>(set.items.size());
  for (const auto& v : set.items) s.scale += (v - s.mean).cwiseAbs2();
  s.scale = (s.scale / static_cast<double>(set.items.size())).cwiseSqrt();
  for (Eigen::Index i = 0; i < d; ++i)
    if (s.scale[i] < 1e-12) s.scale[i] = 1.0;
  return s;
}

Eigen::VectorXd Standardizer::apply(const Eigen::Ref<const Eigen::VectorXd>& v) const {
  return (v - mean).cwiseQuotient(scale);
}

LabeledSet Standardizer::apply(const LabeledSet& set) const {
  LabeledSet out{{}, set.labels, set.classes};
  out.items.reserve(set.items.size());
  for (const auto& v : set.items) out.items.push_back(apply(v));
  return out;
}

}  // namespace ncdnet
