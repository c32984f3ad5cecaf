#include <doctest.h>

#include <random>
#include <set>

#include <Eigen/Eigenvalues>

#include "ncdnet/matrix_io.hpp"
#include "ncdnet/ncd.hpp"
#include "ncdnet/spectral.hpp"

using namespace ncdnet;

namespace {

Eigen::MatrixXd golden(const char* name) { return load_matrix_csv(std::string(NCDNET_TEST_DATA) + "/" + name); }

Eigen::MatrixXd random_symmetric(long n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-5, 5);
  Eigen::MatrixXd m(n, n);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j <= i; ++j) m(i, j) = m(j, i) = u(rng);
  return m;
}

Eigen::MatrixXd block_distance(const std::vector<int>& sizes, double within, double between) {
  long n = 0;
  for (int s : sizes) n += s;
  Eigen::MatrixXd d = Eigen::MatrixXd::Constant(n, n, between);
  long off = 0;
  for (int s : sizes) {
    d.block(off, off, s, s).setConstant(within);
    off += s;
  }
  d.diagonal().setZero();
  return d;
}

bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if ((a[i] == a[j]) != (b[i] == b[j])) return false;
  return true;
}

}  // namespace

TEST_CASE("affinity kernel") {
  Eigen::MatrixXd d(2, 2);
  d << 0, 0.3, 0.3, 0;
  const auto a = affinity_from_distance(d, 0.5);
  CHECK(a(0, 0) == 1.0);
  CHECK(a(0, 1) == doctest::Approx(std::exp(-0.09 / 0.5)));
  CHECK(a(0, 1) == a(1, 0));
  CHECK(affinity_from_distance(Eigen::MatrixXd::Zero(3, 3), 1.0).isOnes());
  CHECK((affinity_from_distance(d, 1e6).array() > 1.0 - 1e-12).all());
  double prev = 2.0;
  for (double v = 0.0; v < 2.0; v += 0.1) {
    Eigen::MatrixXd e(2, 2);
    e << 0, v, v, 0;
    const double cur = affinity_from_distance(e, 0.4)(0, 1);
    CHECK(cur < prev);
    prev = cur;
  }
  CHECK_THROWS_AS(affinity_from_distance(d, 0.0), Error);
  CHECK_THROWS_AS(affinity_from_distance(d, -1.0), Error);
}

TEST_CASE("median_offdiag") {
  Eigen::MatrixXd d(3, 3);
  d << 0, 0.1, 0.5, 0.1, 0, 0.3, 0.5, 0.3, 0;
  CHECK(median_offdiag(d) == 0.3);
  CHECK(median_offdiag(Eigen::MatrixXd::Zero(4, 4)) == 1.0);
}

TEST_CASE("degree and Laplacian") {
  CHECK(degree_matrix(Eigen::MatrixXd::Identity(4, 4)).isOnes());
  CHECK(degree_matrix(Eigen::MatrixXd::Ones(2, 2)) == Eigen::Vector2d(2, 2));
  CHECK(laplacian(degree_matrix(Eigen::MatrixXd::Identity(3, 3)), Eigen::MatrixXd::Identity(3, 3)).isZero());
  CHECK_THROWS_AS(laplacian(Eigen::VectorXd::Ones(3), Eigen::MatrixXd::Identity(4, 4)), Error);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(7, 7);
  for (long i = 0; i < 7; ++i)
    for (long j = 0; j < i; ++j) d(i, j) = d(j, i) = u(rng);
  const auto b = spectral_bundle(d, 0.0);
  CHECK(b.affinity.diagonal().isOnes());
  CHECK((b.affinity.array() >= 0.0).all());
  CHECK((b.affinity.array() <= 1.0).all());
  CHECK((b.degree - b.affinity.rowwise().sum()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(b.laplacian.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(b.eigenvalues[0] >= -1e-9);
  CHECK(std::abs(b.eigenvalues[0]) <= 1e-9);
  CHECK((b.eigenvectors.col(0).cwiseAbs().array() - 1.0 / std::sqrt(7.0)).abs().maxCoeff() <= 1e-6);
  CHECK((b.eigenvectors.transpose() * b.eigenvectors - Eigen::MatrixXd::Identity(7, 7)).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("golden Laplacian: reconstructed affinity") {
  const Eigen::MatrixXd L = golden("golden_laplacian.csv");
  const Eigen::MatrixXd D = golden("golden_degree.csv");
  const Eigen::MatrixXd A = D - L;
  CHECK(L.rowwise().sum().cwiseAbs().maxCoeff() <= 2e-5);
  CHECK((A - A.transpose()).cwiseAbs().maxCoeff() <= 1e-4);
  CHECK((A.diagonal().array() - 1.0).abs().maxCoeff() <= 1e-4);
  CHECK((A.array() >= 0.0).all());
  CHECK((A.array() <= 1.0 + 1e-4).all());
  CHECK(degree_matrix(A)[0] == doctest::Approx(4.08397).epsilon(1e-5));
  CHECK(L(0, 0) == doctest::Approx(D(0, 0) - 1.0).epsilon(1e-9));
}

TEST_CASE("eig_symmetric small cases") {
  Eigen::Matrix2d m;
  m << 2, -1, -1, 2;
  const auto e = eig_symmetric(m);
  CHECK(e.values[0] == doctest::Approx(1.0));
  CHECK(e.values[1] == doctest::Approx(3.0));
  for (long j = 0; j < 2; ++j) {
    long first = 0;
    while (std::abs(e.vectors(first, j)) <= 1e-9) ++first;
    CHECK(e.vectors(first, j) > 0.0);
  }
  Eigen::Matrix2d bad;
  bad << 1, 2, 2.1, 1;
  try {
    eig_symmetric(bad);
    FAIL("expected NotSymmetric");
  } catch (const Error& err) {
    CHECK(err.code() == Errc::NotSymmetric);
  }
  const auto one = eig_symmetric(Eigen::MatrixXd::Constant(1, 1, 4.0));
  CHECK(one.values[0] == 4.0);
  CHECK(one.vectors(0, 0) == 1.0);
}

TEST_CASE("eig_symmetric on random symmetric matrices") {
  std::mt19937_64 rng(50);
  for (int t = 0; t < 50; ++t) {
    const long n = 2 + t % 12;
    const Eigen::MatrixXd m = random_symmetric(n, rng);
    const auto e = eig_symmetric(m);
    const double scale = m.cwiseAbs().rowwise().sum().maxCoeff();
    const Eigen::MatrixXd recon = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
    CHECK((recon - m).cwiseAbs().rowwise().sum().maxCoeff() <= 1e-8 * scale);
    CHECK((e.vectors.transpose() * e.vectors - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-9);
    for (long j = 0; j < n; ++j)
      CHECK((m * e.vectors.col(j) - e.values[j] * e.vectors.col(j)).norm() <= 1e-8 * m.norm());
    for (long j = 1; j < n; ++j) CHECK(e.values[j] >= e.values[j - 1]);

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(m);
    CHECK((ref.eigenvalues() - e.values).cwiseAbs().maxCoeff() <= 1e-9 * scale);
  }
}

TEST_CASE("zero eigenvalue multiplicity counts components") {
  for (int comps = 1; comps <= 3; ++comps) {
    std::vector<int> sizes(static_cast<std::size_t>(comps), 3);
    const long n = 3 * comps;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int c = 0; c < comps; ++c) a.block(3 * c, 3 * c, 3, 3).setConstant(0.8);
    a.diagonal().setOnes();
    const auto L = laplacian(degree_matrix(a), a);
    const auto e = eig_symmetric(L);
    int zeros = 0;
    for (long j = 0; j < n; ++j) zeros += std::abs(e.values[j]) <= 1e-9 ? 1 : 0;
    CHECK(zeros == comps);
  }
}

TEST_CASE("golden eigendecomposition") {
  const auto b = bundle_from_laplacian(golden("golden_laplacian.csv"));
  const Eigen::MatrixXd F = golden("golden_eigenvectors.csv");
  CHECK(b.eigenvalues[0] <= 1e-4);
  CHECK((b.eigenvectors.col(0).cwiseAbs().array() - 0.44721).abs().maxCoeff() <= 1e-4);
  CHECK(b.eigenvalues[1] == doctest::Approx(3.787279998902).epsilon(1e-9));
  CHECK(b.eigenvalues[4] == doctest::Approx(4.327130003340).epsilon(1e-9));

  // Published columns 1, 2 and 5 are eigenvectors up to sign.
  for (long c : {0L, 1L, 4L}) {
    double best = 1e9;
    for (long j = 0; j < 5; ++j)
      for (double s : {1.0, -1.0}) best = std::min(best, (F.col(c) - s * b.eigenvectors.col(j)).cwiseAbs().maxCoeff());
    CAPTURE(c);
    CHECK(best <= 5e-3);
  }
  // Columns 3 and 4 lie in the invariant subspace of the 3rd and 4th
  // eigenvalues, though they are a rotated basis of it.
  const Eigen::MatrixXd P = b.eigenvectors.middleCols(2, 2);
  for (long c : {2L, 3L}) CHECK((F.col(c) - P * (P.transpose() * F.col(c))).norm() <= 5e-4);
}

TEST_CASE("golden embedding") {
  const auto b = bundle_from_laplacian(golden("golden_laplacian.csv"));
  const auto e = embed_2d(b);
  Eigen::Matrix<double, 5, 2> want;
  want << 7.071216460600e-01, 3.083387630681e-01, -7.070919108678e-01, 3.084523435821e-01, -2.239374015039e-05,
      -5.430396906748e-01, -6.168085372032e-05, -5.429260670672e-01, 5.433923878006e-05, 4.691732504941e-01;
  CHECK((e - want).cwiseAbs().maxCoeff() <= 1e-8);
  // A and B sit apart from C and D on the second axis.
  CHECK(std::min(e(0, 1), e(1, 1)) > std::max(e(2, 1), e(3, 1)) + 0.5);
  const auto labels = partition(e, 5, 0);
  CHECK(labels == std::vector<int>{0, 1, 2, 3, 4});
  CHECK_THROWS_AS(embed_2d(spectral_bundle(Eigen::MatrixXd::Zero(2, 2), 1.0)), Error);
}

TEST_CASE("Fiedler vector separates two components") {
  const auto d = block_distance({4, 3}, 0.05, 1.0);
  const auto b = spectral_bundle(d, 0.5);
  const auto e = embed_2d(b);
  const auto labels = partition(e, 2);
  CHECK(labels == std::vector<int>{0, 0, 0, 0, 1, 1, 1});
}

TEST_CASE("complete uniform graph") {
  Eigen::MatrixXd d = Eigen::MatrixXd::Constant(5, 5, 0.5);
  d.diagonal().setZero();
  const auto b = spectral_bundle(d, 0.5);
  for (long j = 2; j < 5; ++j) CHECK(b.eigenvalues[j] == doctest::Approx(b.eigenvalues[1]).epsilon(1e-9));
  const auto e = embed_2d(b);
  CHECK(e.allFinite());
  CHECK(embed_2d(b) == e);
}

TEST_CASE("partition") {
  Eigen::MatrixXd pts(8, 2);
  pts << 0, 0, 0.1, 0, 0, 0.1, 0.1, 0.1, 5, 5, 5.1, 5, 5, 5.1, 5.1, 5.1;
  pts.rowwise() -= pts.colwise().mean();
  // k = 2 is a sign cut on the first coordinate
  CHECK(partition(pts, 2) == std::vector<int>{0, 0, 0, 0, 1, 1, 1, 1});
  CHECK(same_partition(partition(pts, 3, 1), partition(pts, 3, 1)));
  const auto all = partition(pts, 8);
  CHECK(std::set<int>(all.begin(), all.end()).size() == 8);
  CHECK_THROWS_AS(partition(pts, 9), Error);
  CHECK_THROWS_AS(partition(pts, 0), Error);
}

TEST_CASE("five blocks are recovered by k = 5") {
  const std::vector<int> sizes{4, 5, 3, 6, 4};
  const auto d = block_distance(sizes, 0.1, 0.9);
  const auto b = spectral_bundle(d, 0.0);
  const auto labels = partition(b.embedding, 5, 7);
  std::vector<int> truth;
  for (int c = 0; c < 5; ++c) truth.insert(truth.end(), static_cast<std::size_t>(sizes[static_cast<std::size_t>(c)]), c);
  CHECK(same_partition(labels, truth));
}
