#include "ncdnet/scaling.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "ncdnet/convnet.hpp"
#include "ncdnet/error.hpp"
#include "ncdnet/ncd.hpp"

namespace ncdnet {
namespace {

double r_squared(const Eigen::VectorXd& y, const Eigen::VectorXd& fitted) {
  const double mean = y.mean();
  const double ss_tot = (y.array() - mean).square().sum();
  const double ss_res = (y - fitted).squaredNorm();
  return ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
}

Eigen::Vector2d least_squares(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  Eigen::MatrixXd design(x.size(), 2);
  design.col(0) = x;
  design.col(1).setOnes();
  return design.colPivHouseholderQr().solve(y);
}

template <typename Fn>
double time_per_call(Fn&& fn, const ScalingOptions& opts) {
  using clock = std::chrono::steady_clock;
  double best = std::numeric_limits<double>::infinity();
  for (int t = 0; t < opts.trials; ++t) {
    int calls = 0;
    const auto start = clock::now();
    double elapsed = 0.0;
    do {
      fn();
      ++calls;
      elapsed = std::chrono::duration<double>(clock::now() - start).count();
    } while (elapsed < opts.min_seconds);
    best = std::min(best, elapsed / calls);
  }
  return best;
}

ScalingSeries finish(std::string name, std::vector<double> sizes, std::vector<double> seconds) {
  ScalingSeries s{std::move(name), std::move(sizes), std::move(seconds), {}, 0.0};
  s.fit = fit_power_law(s.sizes, s.seconds);
  s.quadratic_r2 = quadratic_r2(s.sizes, s.seconds);
  return s;
}

}  // namespace

PowerFit fit_power_law(const std::vector<double>& sizes, const std::vector<double>& seconds) {
  if (sizes.size() < 3 || sizes.size() != seconds.size()) throw Error(Errc::TooFewSizes, "need >= 3 sizes to fit");
  const auto n = static_cast<Eigen::Index>(sizes.size());
  Eigen::VectorXd lx(n), ly(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(sizes[static_cast<std::size_t>(i)] > 0.0) || !(seconds[static_cast<std::size_t>(i)] > 0.0)) {
      throw Error(Errc::BadParams, "power-law fit needs positive sizes and times");
    }
    lx[i] = std::log(sizes[static_cast<std::size_t>(i)]);
    ly[i] = std::log(seconds[static_cast<std::size_t>(i)]);
  }
  const Eigen::Vector2d beta = least_squares(lx, ly);
  const Eigen::VectorXd fitted = (lx * beta[0]).array() + beta[1];
  return {beta[0], std::exp(beta[1]), r_squared(ly, fitted)};
}

double quadratic_r2(const std::vector<double>& sizes, const std::vector<double>& seconds) {
  if (sizes.size() < 3 || sizes.size() != seconds.size()) throw Error(Errc::TooFewSizes, "need >= 3 sizes to fit");
  const auto n = static_cast<Eigen::Index>(sizes.size());
  Eigen::VectorXd x2(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x2[i] = sizes[static_cast<std::size_t>(i)] * sizes[static_cast<std::size_t>(i)];
    y[i] = seconds[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector2d beta = least_squares(x2, y);
  return r_squared(y, (x2 * beta[0]).array() + beta[1]);
}

std::string ScalingReport::to_text() const {
  std::ostringstream out;
  out << "series,size,seconds\n";
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.sizes.size(); ++i) out << s.name << ',' << s.sizes[i] << ',' << s.seconds[i] << '\n';
  out << "\nseries,exponent,r2_power,r2_quadratic\n";
  for (const auto& s : series) out << s.name << ',' << s.fit.exponent << ',' << s.fit.r2 << ',' << s.quadratic_r2 << '\n';
  return out.str();
}

ScalingReport scaling_report(const std::vector<int>& matrix_sizes, const std::vector<int>& conv_sizes,
                             const ScalingOptions& opts) {
  if (matrix_sizes.size() < 3 || conv_sizes.size() < 3) throw Error(Errc::TooFewSizes, "need >= 3 sizes per series");
  for (int n : matrix_sizes)
    if (n < 2) throw Error(Errc::BadParams, "distance-matrix sizes must be >= 2");
  for (int w : conv_sizes)
    if (w < opts.conv_kernel) throw Error(Errc::BadParams, "conv sizes must be >= kernel size");

  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ScalingReport report;

  const int max_n = *std::max_element(matrix_sizes.begin(), matrix_sizes.end());
  std::vector<Bytes> pool(static_cast<std::size_t>(max_n));
  for (auto& item : pool) {
    item.resize(opts.item_bytes);
    for (auto& b : item) b = static_cast<std::uint8_t>(byte(rng));
  }
  std::vector<double> sizes, seconds;
  for (int n : matrix_sizes) {
    const std::vector<Bytes> items(pool.begin(), pool.begin() + n);
    sizes.push_back(n);
    seconds.push_back(time_per_call([&] { (void)distance_matrix(items, {CompressorId{}, 0.1, 1}); }, opts));
  }
  report.series.push_back(finish("distance_matrix", sizes, seconds));

  Tensor4<double> filters(opts.conv_kernel, opts.conv_kernel, 1, opts.conv_filters);
  filters.columns() = filters.columns().unaryExpr([&](double) { return unit(rng) - 0.5; });
  const ConvLayerSpec<double> spec(filters, Eigen::VectorXd::Zero(opts.conv_filters), {1, 0, Activation::sigmoid, 1.0});
  sizes.clear();
  seconds.clear();
  for (int w : conv_sizes) {
    Tensor4<double> input(w, w, 1, 1);
    input.columns() = input.columns().unaryExpr([&](double) { return unit(rng); });
    sizes.push_back(w);
    seconds.push_back(time_per_call([&] { (void)conv2d_forward(input, spec); }, opts));
  }
  report.series.push_back(finish("conv2d", sizes, seconds));
  return report;
}

ScalingReport scaling_report(const std::vector<int>& sizes, const ScalingOptions& opts) {
  return scaling_report(sizes, sizes, opts);
}

}  // namespace ncdnet
