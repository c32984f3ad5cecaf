#include "ncdnet/ncd.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "ncdnet/error.hpp"

namespace ncdnet {

DistanceMatrix::DistanceMatrix(Eigen::MatrixXd d, double epsilon) : d_(std::move(d)), epsilon_(epsilon) {
  if (d_.rows() != d_.cols() || d_.rows() == 0) {
    throw Error(Errc::InvalidMatrix, "distance matrix must be square and nonempty");
  }
  for (Eigen::Index i = 0; i < d_.rows(); ++i) {
    if (d_(i, i) != 0.0) throw Error(Errc::InvalidMatrix, "nonzero diagonal at " + std::to_string(i));
    for (Eigen::Index j = i + 1; j < d_.cols(); ++j) {
      const double v = d_(i, j);
      if (v != d_(j, i)) {
        throw Error(Errc::InvalidMatrix,
                    "asymmetric entry (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
      if (!(v >= 0.0 && v <= 1.0 + epsilon_)) {
        throw Error(Errc::InvalidMatrix, "entry (" + std::to_string(i) + "," + std::to_string(j) +
                                             ") = " + std::to_string(v) + " out of range");
      }
    }
  }
}

double ncd_from_lengths(double cx, double cy, double cxy) {
  const double hi = std::max(cx, cy);
  if (hi <= 0.0) throw Error(Errc::DegenerateCompression, "max(C(x), C(y)) is zero");
  return (cxy - std::min(cx, cy)) / hi;
}

double ncd_vector_form(double cx, double cy, double cxy) {
  const double hi = std::max(cx, cy);
  if (hi <= 0.0) throw Error(Errc::DegenerateCompression, "max(C(X), C(Y)) is zero");
  return 1.0 - (cx + cy - cxy) / hi;
}

namespace {

struct JointLengths {
  double cx, cy, cxy;
};

JointLengths joint_lengths(ByteView x, ByteView y, const CompressorId& c) {
  if (x.empty() || y.empty()) throw Error(Errc::EmptyInput, "NCD needs nonempty inputs");
  const auto xy = concat(x, y, c.block_capacity);
  const auto yx = concat(y, x, c.block_capacity);
  const auto cxy = std::min(compressed_len(xy, c), compressed_len(yx, c));
  return {static_cast<double>(compressed_len(x, c)), static_cast<double>(compressed_len(y, c)),
          static_cast<double>(cxy)};
}

}  // namespace

double ncd_bytes(ByteView x, ByteView y, const CompressorId& c) {
  const auto l = joint_lengths(x, y, c);
  return std::max(0.0, ncd_from_lengths(l.cx, l.cy, l.cxy));
}

double ncd_vectors(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y,
                   const CompressorId& c) {
  if (x.size() != y.size()) {
    throw Error(Errc::LengthMismatch,
                "vector lengths " + std::to_string(x.size()) + " and " + std::to_string(y.size()));
  }
  const auto l = joint_lengths(quantize_features(x), quantize_features(y), c);
  return std::max(0.0, ncd_vector_form(l.cx, l.cy, l.cxy));
}

DistanceMatrix distance_matrix(const std::vector<Bytes>& items, const DistanceOptions& opts) {
  const auto n = static_cast<Eigen::Index>(items.size());
  if (n == 0) throw Error(Errc::TooSmall, "distance matrix needs at least one item");

  const auto& c = opts.compressor;
  std::vector<double> single(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].empty()) throw Error(Errc::EmptyInput, "item " + std::to_string(i) + " is empty");
    try {
      single[i] = static_cast<double>(compressed_len(items[i], c));
    } catch (const Error& e) {
      throw Error(e.code(), "item " + std::to_string(i) + ": " + e.what());
    }
  }

  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  pairs.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto worker = [&] {
    for (std::size_t k = next++; k < pairs.size(); k = next++) {
      const auto [i, j] = pairs[k];
      try {
        const auto& x = items[static_cast<std::size_t>(i)];
        const auto& y = items[static_cast<std::size_t>(j)];
        const auto cxy = std::min(compressed_len(concat(x, y, c.block_capacity), c),
                                  compressed_len(concat(y, x, c.block_capacity), c));
        d(i, j) = std::max(0.0, ncd_from_lengths(single[static_cast<std::size_t>(i)],
                                                 single[static_cast<std::size_t>(j)],
                                                 static_cast<double>(cxy)));
      } catch (const Error& e) {
        std::lock_guard lock(error_mutex);
        if (!first_error) {
          first_error = std::make_exception_ptr(Error(
              e.code(), "pair (" + std::to_string(i) + "," + std::to_string(j) + "): " + e.what()));
        }
        next = pairs.size();
      }
    }
  };

  unsigned threads = opts.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : opts.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, pairs.size())));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);

  d.triangularView<Eigen::StrictlyLower>() = d.transpose();
  return DistanceMatrix(std::move(d), opts.epsilon);
}

DistanceMatrix distance_matrix(const Eigen::Ref<const Eigen::MatrixXd>& features, const DistanceOptions& opts) {
  std::vector<Bytes> items;
  items.reserve(static_cast<std::size_t>(features.cols()));
  for (Eigen::Index j = 0; j < features.cols(); ++j) items.push_back(quantize_features(features.col(j)));
  return distance_matrix(items, opts);
}

double offdiag_mean(const DistanceMatrix& m) {
  const auto n = m.size();
  if (n < 2) throw Error(Errc::TooSmall, "off-diagonal mean needs n >= 2");
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) values.push_back(m(i, j));
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  // The mean of equal entries must equal that entry for the fallback rule.
  return std::clamp(sum / static_cast<double>(values.size()), values.front(), values.back());
}

}  // namespace ncdnet
