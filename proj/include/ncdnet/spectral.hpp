#pragma once

// Spectral pipeline over a distance matrix: Gaussian affinity, degree,
// unnormalized Laplacian L = D - A, cyclic-Jacobi eigendecomposition, 2-D
// embedding on the eigenvectors of the 2nd and 3rd smallest eigenvalues,
// and a partition of that embedding.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ncdnet/error.hpp"

namespace ncdnet {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Embedding = Eigen::Matrix<Scalar, Eigen::Dynamic, 2>;

inline constexpr int kJacobiMaxSweeps = 100;

/// Median of the strictly-upper-triangle entries; 1 when that median is 0
/// or the matrix has fewer than two rows.
template <typename Derived>
typename Derived::Scalar median_offdiag(const Eigen::MatrixBase<Derived>& d) {
  using Scalar = typename Derived::Scalar;
  std::vector<Scalar> v;
  for (Eigen::Index i = 0; i < d.rows(); ++i)
    for (Eigen::Index j = i + 1; j < d.cols(); ++j) v.push_back(d(i, j));
  if (v.empty()) return Scalar(1);
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  const Scalar med = v.size() % 2 ? v[mid] : (v[mid - 1] + v[mid]) / Scalar(2);
  return med > Scalar(0) ? med : Scalar(1);
}

/// a(i,j) = exp(-d(i,j)^2 / (2 sigma^2)) off the diagonal, a(i,i) = 1.
template <typename Derived>
MatrixX<typename Derived::Scalar> affinity_from_distance(const Eigen::MatrixBase<Derived>& d,
                                                          typename Derived::Scalar sigma) {
  using Scalar = typename Derived::Scalar;
  if (!(sigma > Scalar(0)) || !std::isfinite(static_cast<double>(sigma))) {
    throw Error(Errc::BadSigma, "sigma must be positive and finite");
  }
  if (d.rows() != d.cols()) throw Error(Errc::ShapeMismatch, "distance matrix must be square");
  const Scalar denom = Scalar(2) * sigma * sigma;
  MatrixX<Scalar> a = (-(d.array().square()) / denom).exp().matrix();
  a.diagonal().setOnes();
  return a;
}

template <typename Derived>
VectorX<typename Derived::Scalar> degree_matrix(const Eigen::MatrixBase<Derived>& a) {
  if (a.rows() != a.cols()) throw Error(Errc::ShapeMismatch, "affinity must be square");
  return a.rowwise().sum();
}

template <typename DerivedD, typename DerivedA>
MatrixX<typename DerivedA::Scalar> laplacian(const Eigen::MatrixBase<DerivedD>& degree,
                                              const Eigen::MatrixBase<DerivedA>& a) {
  if (a.rows() != a.cols() || degree.size() != a.rows()) {
    throw Error(Errc::ShapeMismatch, "degree length " + std::to_string(degree.size()) + " vs affinity " +
                                         std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
  MatrixX<typename DerivedA::Scalar> l = -a;
  l.diagonal() += degree;
  return l;
}

template <typename Scalar>
struct EigenDecomposition {
  VectorX<Scalar> values;   ///< ascending
  MatrixX<Scalar> vectors;  ///< column i pairs with values[i]
  int sweeps = 0;
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Eigenvalues come back ascending. Each eigenvector is normalized so its
/// first component with magnitude above 1e-9 is positive. Throws
/// NotSymmetric if |m - m^T| exceeds 1e-9 anywhere, NoConvergence if the
/// off-diagonal mass has not vanished after kJacobiMaxSweeps sweeps.
template <typename Derived>
EigenDecomposition<typename Derived::Scalar> eig_symmetric(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  using std::abs;
  using std::sqrt;
  const Eigen::Index n = m.rows();
  if (m.cols() != n) throw Error(Errc::NotSymmetric, "matrix is not square");
  if (n == 0) throw Error(Errc::TooSmall, "empty matrix");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-9)) {
    throw Error(Errc::NotSymmetric, "asymmetry exceeds 1e-9");
  }

  MatrixX<Scalar> a = (m + m.transpose()) / Scalar(2);
  MatrixX<Scalar> v = MatrixX<Scalar>::Identity(n, n);
  const Scalar scale = a.cwiseAbs().maxCoeff();
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();

  auto off_norm = [&] {
    Scalar s(0);
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) s += a(p, q) * a(p, q);
    return sqrt(s);
  };

  EigenDecomposition<Scalar> result;
  int sweep = 0;
  for (; sweep <= kJacobiMaxSweeps; ++sweep) {
    if (scale == Scalar(0) || off_norm() <= eps * scale) break;
    if (sweep == kJacobiMaxSweeps) throw Error(Errc::NoConvergence, "Jacobi did not converge in 100 sweeps");
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Scalar apq = a(p, q);
        if (abs(apq) <= eps * eps * scale) continue;
        // Rotation angle that annihilates a(p,q) (Golub & Van Loan sym.schur2).
        const Scalar tau = (a(q, q) - a(p, p)) / (Scalar(2) * apq);
        const Scalar t = (tau >= 0 ? Scalar(1) : Scalar(-1)) / (abs(tau) + sqrt(Scalar(1) + tau * tau));
        const Scalar c = Scalar(1) / sqrt(Scalar(1) + t * t);
        const Scalar s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  result.sweeps = sweep;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return a(i, i) < a(j, j); });
  result.values.resize(n);
  result.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto src = order[static_cast<std::size_t>(k)];
    result.values[k] = a(src, src);
    VectorX<Scalar> col = v.col(src);
    col.normalize();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (abs(col[i]) > Scalar(1e-9)) {
        if (col[i] < 0) col = -col;
        break;
      }
    }
    result.vectors.col(k) = col;
  }
  return result;
}

template <typename Scalar>
struct SpectralBundle {
  MatrixX<Scalar> affinity;
  VectorX<Scalar> degree;
  MatrixX<Scalar> laplacian;
  VectorX<Scalar> eigenvalues;
  MatrixX<Scalar> eigenvectors;
  Embedding<Scalar> embedding;  ///< empty when n < 3
};

namespace detail {
template <typename Scalar>
void finish_bundle(SpectralBundle<Scalar>& b) {
  auto eig = eig_symmetric(b.laplacian);
  b.eigenvalues = std::move(eig.values);
  b.eigenvectors = std::move(eig.vectors);
  const auto n = b.eigenvectors.rows();
  if (n >= 3) {
    b.embedding.resize(n, 2);
    b.embedding.col(0) = b.eigenvectors.col(1);
    b.embedding.col(1) = b.eigenvectors.col(2);
  }
}
}  // namespace detail

/// Full pipeline from a distance matrix; sigma <= 0 selects the median
/// off-diagonal distance.
template <typename Derived>
SpectralBundle<typename Derived::Scalar> spectral_bundle(const Eigen::MatrixBase<Derived>& distance,
                                                          typename Derived::Scalar sigma) {
  using Scalar = typename Derived::Scalar;
  SpectralBundle<Scalar> b;
  if (!(sigma > Scalar(0))) sigma = median_offdiag(distance);
  b.affinity = affinity_from_distance(distance, sigma);
  b.degree = degree_matrix(b.affinity);
  b.laplacian = laplacian(b.degree, b.affinity);
  detail::finish_bundle(b);
  return b;
}

/// Bundle around a prebuilt Laplacian. Unit self-affinity is assumed, so
/// degree = diag(L) + 1 and A = D - L.
template <typename Derived>
SpectralBundle<typename Derived::Scalar> bundle_from_laplacian(const Eigen::MatrixBase<Derived>& l) {
  using Scalar = typename Derived::Scalar;
  if (l.rows() != l.cols()) throw Error(Errc::ShapeMismatch, "Laplacian must be square");
  SpectralBundle<Scalar> b;
  b.laplacian = l;
  b.degree = l.diagonal().array() + Scalar(1);
  b.affinity = -l;
  b.affinity.diagonal().setOnes();
  detail::finish_bundle(b);
  return b;
}

/// Points (v2[i], v3[i]) from the eigenvectors of the 2nd and 3rd smallest
/// eigenvalues.
template <typename Scalar>
Embedding<Scalar> embed_2d(const SpectralBundle<Scalar>& b) {
  const auto n = b.eigenvectors.rows();
  if (n < 3) throw Error(Errc::TooSmall, "2-D embedding needs n >= 3");
  Embedding<Scalar> e(n, 2);
  e.col(0) = b.eigenvectors.col(1);
  e.col(1) = b.eigenvectors.col(2);
  return e;
}

namespace detail {

/// Relabels so labels appear in order of first occurrence: 0, 1, 2, ...
inline std::vector<int> canonical_labels(const std::vector<int>& labels) {
  std::vector<std::pair<int, int>> seen;  // original -> canonical
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto it = std::find_if(seen.begin(), seen.end(), [&](const auto& e) { return e.first == labels[i]; });
    if (it == seen.end()) it = seen.insert(seen.end(), {labels[i], static_cast<int>(seen.size())});
    out[i] = it->second;
  }
  return out;
}

template <typename Derived>
std::vector<int> kmeans(const Eigen::MatrixBase<Derived>& pts, int k, std::uint64_t seed, int restarts = 10,
                        int max_iter = 300) {
  using Scalar = typename Derived::Scalar;
  const auto n = pts.rows();
  std::mt19937_64 rng(seed);
  std::vector<int> best_labels;
  Scalar best_inertia = std::numeric_limits<Scalar>::infinity();

  for (int r = 0; r < restarts; ++r) {
    // k-means++ seeding
    MatrixX<Scalar> centers(k, pts.cols());
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    centers.row(0) = pts.row(pick(rng));
    VectorX<Scalar> dist2(n);
    for (int c = 1; c < k; ++c) {
      for (Eigen::Index i = 0; i < n; ++i) {
        Scalar best = std::numeric_limits<Scalar>::infinity();
        for (int j = 0; j < c; ++j) best = std::min(best, (pts.row(i) - centers.row(j)).squaredNorm());
        dist2[i] = best;
      }
      const Scalar total = dist2.sum();
      Eigen::Index chosen = 0;
      if (total > Scalar(0)) {
        std::uniform_real_distribution<double> u(0.0, static_cast<double>(total));
        double target = u(rng);
        for (Eigen::Index i = 0; i < n; ++i) {
          target -= static_cast<double>(dist2[i]);
          if (target <= 0.0) {
            chosen = i;
            break;
          }
          chosen = i;
        }
      } else {
        chosen = pick(rng);
      }
      centers.row(c) = pts.row(chosen);
    }

    std::vector<int> labels(static_cast<std::size_t>(n), -1);
    for (int it = 0; it < max_iter; ++it) {
      bool changed = false;
      for (Eigen::Index i = 0; i < n; ++i) {
        int arg = 0;
        Scalar best = std::numeric_limits<Scalar>::infinity();
        for (int c = 0; c < k; ++c) {
          const Scalar d = (pts.row(i) - centers.row(c)).squaredNorm();
          if (d < best) {
            best = d;
            arg = c;
          }
        }
        if (labels[static_cast<std::size_t>(i)] != arg) {
          labels[static_cast<std::size_t>(i)] = arg;
          changed = true;
        }
      }
      if (!changed) break;
      for (int c = 0; c < k; ++c) {
        Eigen::Matrix<Scalar, 1, Eigen::Dynamic> sum = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>::Zero(pts.cols());
        int count = 0;
        for (Eigen::Index i = 0; i < n; ++i)
          if (labels[static_cast<std::size_t>(i)] == c) {
            sum += pts.row(i);
            ++count;
          }
        if (count > 0) centers.row(c) = sum / static_cast<Scalar>(count);
      }
    }

    Scalar inertia(0);
    for (Eigen::Index i = 0; i < n; ++i) inertia += (pts.row(i) - centers.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
    if (inertia < best_inertia) {
      best_inertia = inertia;
      best_labels = labels;
    }
  }
  return best_labels;
}

}  // namespace detail

/// Labels for each embedded point, canonicalized to first-occurrence order.
/// k = 2 is a sign cut on the first coordinate (the Fiedler vector); k > 2
/// runs seeded k-means++ with restarts; k = n gives every point its own label.
template <typename Derived>
std::vector<int> partition(const Eigen::MatrixBase<Derived>& embedding, int k, std::uint64_t seed = 0) {
  const auto n = embedding.rows();
  if (k < 1 || k > n) throw Error(Errc::BadK, "k = " + std::to_string(k) + " with n = " + std::to_string(n));
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  if (k == n) {
    std::iota(labels.begin(), labels.end(), 0);
    return labels;
  }
  if (k == 1) return labels;
  if (k == 2) {
    for (Eigen::Index i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = embedding(i, 0) < 0 ? 1 : 0;
    return detail::canonical_labels(labels);
  }
  return detail::canonical_labels(detail::kmeans(embedding, k, seed));
}

}  // namespace ncdnet
