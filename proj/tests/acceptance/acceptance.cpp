// Acceptance criteria. One PASS/FAIL line per criterion; tolerances are fixed here.
// usage: ncdnet_acceptance DATA_DIR [criterion...]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "ncdnet/convnet.hpp"
#include "ncdnet/experiment.hpp"
#include "ncdnet/matrix_io.hpp"
#include "ncdnet/ncd.hpp"
#include "ncdnet/ncd_layer.hpp"
#include "ncdnet/scaling.hpp"
#include "ncdnet/spectral.hpp"
#include "oracles.hpp"

using namespace ncdnet;

namespace {

namespace tol {
constexpr double row_sum = 2e-5;
constexpr double symmetry = 1e-4;
constexpr double unit_diagonal = 1e-4;
constexpr double null_entry = 1e-4;
constexpr double null_value = 1e-4;
constexpr double eigvec_entry = 5e-3;
constexpr double offdiag_mean = 1e-5;
constexpr double ncd_range = 1.1;
constexpr double triangle_slack = 0.05;
constexpr double random_ncd = 0.9;
constexpr double conv = 1e-10;
constexpr double finite_difference = 1e-6;
constexpr double exponent_lo = 1.7;
constexpr double exponent_hi = 2.3;
constexpr double accuracy_gap = 0.10 + 1e-9;
constexpr double golden_seconds = 1.0;
constexpr double ncd_seconds = 30.0;
constexpr double scaling_seconds = 120.0;
constexpr double end_to_end_seconds = 300.0;
}  // namespace tol

constexpr double kGoldenMean = 0.39829;

std::string g_data;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [" << what << "]";
    }
  }
};

Eigen::MatrixXd golden(const char* name) { return load_matrix_csv(g_data + "/" + name); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void golden_laplacian(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::MatrixXd L = golden("golden_laplacian.csv");
  const Eigen::MatrixXd D = golden("golden_degree.csv");
  const Eigen::MatrixXd A = D - L;
  const double rows = L.rowwise().sum().cwiseAbs().maxCoeff();
  const double asym = (A - A.transpose()).cwiseAbs().maxCoeff();
  const double diag = (A.diagonal().array() - 1.0).abs().maxCoeff();
  o.detail << "max|row sum|=" << rows << " max|A-A'|=" << asym << " max|diag-1|=" << diag;
  o.require(rows <= tol::row_sum, "row sums");
  o.require(asym <= tol::symmetry, "A symmetric");
  o.require(diag <= tol::unit_diagonal, "unit diagonal");
  // entries in [0,1] up to the print precision of the reference data
  o.require((A.array() >= -tol::unit_diagonal).all() && (A.array() <= 1.0 + tol::unit_diagonal).all(), "A in [0,1]");
  const double s = seconds_since(t0);
  o.require(s < tol::golden_seconds, "runtime");
}

void golden_eigendecomposition(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto e = eig_symmetric(golden("golden_laplacian.csv"));
  const Eigen::MatrixXd F = golden("golden_eigenvectors.csv");
  const double inv = 1.0 / std::sqrt(5.0);
  const double null_dev = (e.vectors.col(0).cwiseAbs().array() - inv).abs().maxCoeff();
  o.detail << "lambda0=" << e.values[0] << " max||v0|-1/sqrt5|=" << null_dev;
  o.require(e.values[0] <= tol::null_value, "null eigenvalue");
  o.require(null_dev <= tol::null_entry, "constant null vector");
  // each published column must match a distinct computed eigenvector up to sign
  std::set<long> used;
  o.detail << " column errors:";
  for (long c = 0; c < F.cols(); ++c) {
    double best = 1e9;
    long arg = -1;
    for (long j = 0; j < e.vectors.cols(); ++j) {
      if (used.count(j)) continue;
      for (double sign : {1.0, -1.0}) {
        const double err = (F.col(c) - sign * e.vectors.col(j)).cwiseAbs().maxCoeff();
        if (err < best) {
          best = err;
          arg = j;
        }
      }
    }
    used.insert(arg);
    o.detail << " " << best;
    if (best > tol::eigvec_entry) o.require(false, "column " + std::to_string(c + 1));
  }
  o.require(seconds_since(t0) < tol::golden_seconds, "runtime");
}

void golden_distance_stats(Outcome& o) {
  const Eigen::MatrixXd raw = golden("golden_distance.csv");
  try {
    const DistanceMatrix d(raw);
    const double mean = offdiag_mean(d);
    o.detail << "offdiag_mean=" << mean;
    o.require(std::abs(mean - kGoldenMean) <= tol::offdiag_mean, "offdiag_mean");
  } catch (const Error& e) {
    o.require(false, std::string("invariants: ") + e.what());
  }
}

void ncd_metric_suite(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  // Ten random parents, each with four mutated children, gives related and
  // unrelated pairs.
  std::mt19937_64 rng(2718);
  std::vector<Bytes> items;
  for (int p = 0; p < 10; ++p) {
    const Bytes parent = oracle::random_bytes(256 + 64 * static_cast<std::size_t>(p), 100 + static_cast<std::uint64_t>(p));
    items.push_back(parent);
    for (int c = 0; c < 4; ++c) {
      Bytes child = parent;
      std::uniform_int_distribution<std::size_t> pos(0, child.size() - 1);
      std::uniform_int_distribution<int> byte(0, 255);
      for (int m = 0; m < 8 * (c + 1); ++m) child[pos(rng)] = static_cast<std::uint8_t>(byte(rng));
      items.push_back(child);
    }
  }
  const long n = static_cast<long>(items.size());
  Eigen::MatrixXd d(n, n);
  bool symmetric = true, nonneg = true;
  for (long i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (long j = i + 1; j < n; ++j) {
      const double a = ncd_bytes(items[static_cast<std::size_t>(i)], items[static_cast<std::size_t>(j)]);
      const double b = ncd_bytes(items[static_cast<std::size_t>(j)], items[static_cast<std::size_t>(i)]);
      symmetric = symmetric && a == b;
      nonneg = nonneg && a >= 0.0;
      d(i, j) = d(j, i) = a;
    }
  }
  double worst_triangle = -1e9;
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j)
      for (long k = 0; k < n; ++k)
        if (i != j && j != k && i != k) worst_triangle = std::max(worst_triangle, d(i, k) - d(i, j) - d(j, k));
  double min_random = 1e9;
  for (std::uint64_t s = 0; s < 10; ++s)
    min_random = std::min(min_random, ncd_bytes(oracle::random_bytes(4096, 500 + 2 * s),
                                                oracle::random_bytes(4096, 501 + 2 * s)));
  Eigen::MatrixXd off = d;
  off.diagonal().setConstant(1e9);
  o.detail << "strings=" << n << " min off-diagonal=" << off.minCoeff() << " max=" << d.maxCoeff()
           << " worst triangle excess=" << worst_triangle << " min random 4KB=" << min_random;
  o.require(n == 50, "50 strings");
  o.require(symmetric, "symmetry");
  o.require(nonneg, "non-negativity");
  o.require(d.maxCoeff() <= tol::ncd_range, "range");
  o.require(worst_triangle <= tol::triangle_slack, "triangle");
  o.require(min_random >= tol::random_ncd, "random 4KB");
  o.require(seconds_since(t0) < tol::ncd_seconds, "runtime");
}

void conv_oracle(Outcome& o) {
  std::mt19937_64 rng(4242);
  std::uniform_int_distribution<long> dim(1, 4);
  std::uniform_real_distribution<double> u(-1, 1);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const long kh = dim(rng), kw = dim(rng), ch = dim(rng), k = dim(rng), maps = dim(rng);
    const long stride = 1 + t % 2, pad = t % 3;
    long h = kh + dim(rng) + 2, w = kw + dim(rng) + 2;
    while ((h - kh + 2 * pad) % stride) ++h;
    while ((w - kw + 2 * pad) % stride) ++w;
    const bool sig = t % 2 == 0;
    const double slope = 0.5 + 0.25 * t;
    const ConvParams p{stride, pad, sig ? Activation::sigmoid : Activation::none, slope};
    const FeatureMap filters = oracle::random_tensor(kh, kw, ch, k, rng);
    std::vector<double> bias(static_cast<std::size_t>(k));
    for (auto& b : bias) b = u(rng);
    const Eigen::VectorXd b = Eigen::Map<Eigen::VectorXd>(bias.data(), k);
    const ConvLayerSpec<double> spec(filters, b, p);

    const FeatureMap single = oracle::random_tensor(h, w, ch, 1, rng);
    const auto got1 = conv2d_forward(single, spec);
    const auto want1 = oracle::brute_multimap(single, {filters}, bias, stride, pad, sig, slope);
    const FeatureMap multi = oracle::random_tensor(h, w, ch, maps, rng);
    const auto got = multimap_forward(multi, spec);
    const auto want = oracle::brute_multimap(multi, {filters}, bias, stride, pad, sig, slope);
    if (!got1.same_shape(want1) || !got.same_shape(want)) {
      o.require(false, "shape at shape " + std::to_string(t));
      return;
    }
    worst = std::max({worst, (got1.columns() - want1.columns()).cwiseAbs().maxCoeff(),
                      (got.columns() - want.columns()).cwiseAbs().maxCoeff()});
  }
  double worst_sep = 0.0;
  for (int t = 0; t < 10; ++t) {
    const long ch = 1 + t % 3, kh = 1 + t % 4, kw = 1 + (t + 2) % 4;
    const ConvParams p{1 + t % 2, t % 2, t % 3 == 0 ? Activation::sigmoid : Activation::none, 1.0};
    const FeatureMap in = oracle::random_tensor(16 + kh, 16 + kw, ch, 1, rng);
    Eigen::VectorXd col(kh), row(kw);
    for (auto& v : col) v = u(rng);
    for (auto& v : row) v = u(rng);
    FeatureMap kernel(kh, kw, ch, 1);
    for (long m = 0; m < kh; ++m)
      for (long n = 0; n < kw; ++n)
        for (long c = 0; c < ch; ++c) kernel(m, n, c, 0) = col[m] * row[n];
    const double bias = u(rng);
    const auto full = conv2d_forward(in, ConvLayerSpec<double>(kernel, Eigen::VectorXd::Constant(1, bias), p));
    const auto sep = separable_conv2d(in, col, row, bias, p);
    if (!full.same_shape(sep)) {
      o.require(false, "separable shape");
      return;
    }
    worst_sep = std::max(worst_sep, (full.columns() - sep.columns()).cwiseAbs().maxCoeff());
  }
  o.detail << "shapes=20 max error=" << worst << " separable max error=" << worst_sep;
  o.require(worst <= tol::conv, "loop nest");
  o.require(worst_sep <= tol::conv, "separable");
}

DistanceMatrix three(double d01, double d02, double d12) {
  Eigen::Matrix3d m;
  m << 0, d01, d02, d01, 0, d12, d02, d12, 0;
  return DistanceMatrix(m);
}

void selection_behaviour(Outcome& o) {
  using Kept = std::vector<Eigen::Index>;
  const auto hit = select_from_matrix(three(0.5, 0.1, 0.1), 0.4);
  o.require(hit.kept == Kept{0, 1} && !hit.fallback_applied && hit.criterion_used == 0.4, "threshold hit");

  const auto fb = select_from_matrix(three(0.30, 0.20, 0.10), 0.4);
  o.require(fb.fallback_applied && std::abs(fb.criterion_used - 0.20) <= 1e-15 && fb.kept == Kept{0, 1},
            "mean fallback");

  const auto same = select_features(Eigen::MatrixXd::Constant(64, 4, 0.5));
  o.require(same.fallback_applied && same.kept == Kept{0, 1, 2, 3}, "full propagation");
  o.detail << "identical-column distance=" << same.matrix.matrix()(0, 1);

  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0, 1);
  Eigen::MatrixXd cols(96, 9);
  for (long j = 0; j < cols.cols(); ++j)
    for (long i = 0; i < cols.rows(); ++i) cols(i, j) = u(rng);
  cols.col(3) = Eigen::VectorXd::Constant(96, 0.7);
  cols.col(5) = Eigen::VectorXd::Constant(96, 0.7);
  cols.col(8) = cols.col(1);
  auto contents = [](const Eigen::MatrixXd& m, const SelectionResult& r) {
    std::multiset<Bytes> s;
    for (auto k : r.kept) s.insert(quantize_features(m.col(k)));
    return s;
  };
  const auto base = select_features(cols);
  const auto want = contents(cols, base);
  std::vector<long> perm(static_cast<std::size_t>(cols.cols()));
  std::iota(perm.begin(), perm.end(), 0);
  int invariant = 0;
  for (int t = 0; t < 10; ++t) {
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::MatrixXd shuffled(cols.rows(), cols.cols());
    for (long j = 0; j < cols.cols(); ++j) shuffled.col(j) = cols.col(perm[static_cast<std::size_t>(j)]);
    const auto r = select_features(shuffled);
    invariant += r.fallback_applied == base.fallback_applied && r.criterion_used == base.criterion_used &&
                 contents(shuffled, r) == want;
  }
  o.detail << " kept " << base.kept.size() << "/" << cols.cols() << " invariant shuffles=" << invariant << "/10";
  o.require(invariant == 10, "permutation invariance");
}

double pooled_sum(const FeatureMap& in, PoolKind kind, long window, long stride) {
  return (kind == PoolKind::mean ? mean_pool(in, window, stride) : max_pool(in, window, stride)).columns().sum();
}

void pooling_gradients(Outcome& o) {
  std::mt19937_64 rng(66);
  constexpr double h = 1e-5;
  double worst_fd = 0.0;
  bool mean_share = true, one_hot = true;
  for (int t = 0; t < 10; ++t) {
    const FeatureMap in = oracle::random_tensor(6, 6, 1, 1, rng);
    for (auto [window, stride] : {std::pair<long, long>{2, 2}, {3, 3}, {2, 1}, {3, 1}}) {
      for (PoolKind kind : {PoolKind::mean, PoolKind::max}) {
        const auto g = pool_gradient(in, kind, window, stride);
        for (long y = 0; y < 6; ++y)
          for (long x = 0; x < 6; ++x) {
            FeatureMap up = in, down = in;
            up(y, x, 0, 0) += h;
            down(y, x, 0, 0) -= h;
            const double fd = (pooled_sum(up, kind, window, stride) - pooled_sum(down, kind, window, stride)) / (2 * h);
            worst_fd = std::max(worst_fd, std::abs(fd - g(y, x, 0, 0)));
          }
        if (stride != window) continue;
        const long m = window * window;
        const Eigen::MatrixXd gp = g.plane(0, 0);
        for (long wy = 0; wy + window <= 6; wy += stride)
          for (long wx = 0; wx + window <= 6; wx += stride) {
            const auto block = gp.block(wy, wx, window, window);
            if (kind == PoolKind::mean)
              mean_share = mean_share && (block.array() == 1.0 / static_cast<double>(m)).all();
            else
              one_hot = one_hot && block.sum() == 1.0 && (block.array() == 0.0 || block.array() == 1.0).all();
          }
      }
    }
  }
  Eigen::MatrixXd ties = Eigen::MatrixXd::Zero(6, 6);
  ties.block(0, 0, 2, 2).setConstant(3.0);
  ties(2, 3) = ties(3, 2) = 5.0;
  const auto gt = pool_gradient(FeatureMap::from_plane(ties), PoolKind::max, 2, 2);
  const bool tie_break = gt(0, 0, 0, 0) == 1.0 && gt(0, 1, 0, 0) == 0.0 && gt(1, 0, 0, 0) == 0.0 &&
                         gt(2, 3, 0, 0) == 1.0 && gt(3, 2, 0, 0) == 0.0 && gt(4, 4, 0, 0) == 1.0;
  o.detail << "max |fd - grad|=" << worst_fd;
  o.require(worst_fd <= tol::finite_difference, "finite difference");
  o.require(mean_share, "mean 1/m");
  o.require(one_hot, "max one-hot");
  o.require(tie_break, "row-major tie-break");
}

void complexity_scaling(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = scaling_report(std::vector<int>{16, 32, 64, 128}, std::vector<int>{64, 128, 256, 512});
  for (const auto& s : r.series) {
    o.detail << s.name << " exponent=" << s.fit.exponent << " r2=" << s.fit.r2 << " ";
    o.require(s.fit.exponent >= tol::exponent_lo && s.fit.exponent <= tol::exponent_hi, s.name);
  }
  const double secs = seconds_since(t0);
  o.detail << "seconds=" << secs;
  o.require(secs < tol::scaling_seconds, "runtime");
}

void end_to_end(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ExperimentConfig cfg;
    cfg.seed = seed;
    ExperimentArtifacts art;
    const auto report = run_experiment(cfg, &art);
    if (!report.ok || !art.selection) {
      o.require(false, "seed " + std::to_string(seed) + " failed at " + report.failed_stage + ": " + report.error);
      continue;
    }
    const auto kept = art.selection->kept.size();
    const double gap = std::abs(art.centroid_full - art.centroid_selected);
    o.detail << "seed " << seed << ": " << kept << "/" << art.full_count << " features, accuracy "
             << art.centroid_full << " -> " << art.centroid_selected << "; ";
    o.require(kept < art.full_count, "seed " + std::to_string(seed) + " not fewer");
    o.require(gap <= tol::accuracy_gap, "seed " + std::to_string(seed) + " accuracy gap");
  }
  const double secs = seconds_since(t0);
  o.detail << "seconds=" << secs;
  o.require(secs < tol::end_to_end_seconds, "runtime");
}

void spectral_partition(Outcome& o) {
  const std::vector<int> sizes{4, 5, 3, 6, 4};
  long n = 0;
  for (int s : sizes) n += s;
  Eigen::MatrixXd d = Eigen::MatrixXd::Constant(n, n, 0.9);
  std::vector<int> truth;
  long off = 0;
  for (std::size_t b = 0; b < sizes.size(); ++b) {
    d.block(off, off, sizes[b], sizes[b]).setConstant(0.1);
    truth.insert(truth.end(), static_cast<std::size_t>(sizes[b]), static_cast<int>(b));
    off += sizes[b];
  }
  d.diagonal().setZero();
  const auto b = spectral_bundle(d, 0.0);  // sigma from the median distance
  const auto labels = partition(embed_2d(b), 5, 7);
  const bool exact = labels == truth;  // labels are canonical: first appearance order
  o.detail << "sigma=" << median_offdiag(d) << " labels=";
  for (int l : labels) o.detail << l;
  o.require(exact, "block recovery");
}

const std::map<std::string, std::function<void(Outcome&)>>& criteria() {
  static const std::map<std::string, std::function<void(Outcome&)>> all{
      {"golden_laplacian", golden_laplacian},
      {"golden_eigendecomposition", golden_eigendecomposition},
      {"golden_distance_stats", golden_distance_stats},
      {"ncd_metric_suite", ncd_metric_suite},
      {"conv_oracle", conv_oracle},
      {"selection_behaviour", selection_behaviour},
      {"pooling_gradients", pooling_gradients},
      {"complexity_scaling", complexity_scaling},
      {"end_to_end", end_to_end},
      {"spectral_partition", spectral_partition},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: ncdnet_acceptance DATA_DIR [criterion...]\n";
    return 2;
  }
  g_data = argv[1];
  std::vector<std::string> names;
  for (int i = 2; i < argc; ++i) names.emplace_back(argv[i]);
  if (names.empty())
    for (const auto& [name, fn] : criteria()) names.push_back(name);

  int failed = 0;
  for (const auto& name : names) {
    const auto it = criteria().find(name);
    if (it == criteria().end()) {
      std::cout << "FAIL " << name << " unknown criterion\n";
      ++failed;
      continue;
    }
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      it->second(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << " " << o.detail.str() << " (" << seconds_since(t0)
              << " s)\n";
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
