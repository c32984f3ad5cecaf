#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ncdnet {

/// Least-squares fit of log t = log a + exponent * log n.
struct PowerFit {
  double exponent = 0.0;
  double coefficient = 0.0;
  double r2 = 0.0;
};

PowerFit fit_power_law(const std::vector<double>& sizes, const std::vector<double>& seconds);

/// R^2 of the least-squares fit t = a * n^2 + b.
double quadratic_r2(const std::vector<double>& sizes, const std::vector<double>& seconds);

struct ScalingSeries {
  std::string name;  ///< "distance_matrix" or "conv2d"
  std::vector<double> sizes;
  std::vector<double> seconds;
  PowerFit fit;
  double quadratic_r2 = 0.0;
};

struct ScalingReport {
  std::vector<ScalingSeries> series;
  std::string to_text() const;
};

struct ScalingOptions {
  std::size_t item_bytes = 256;      ///< size of each distance-matrix item
  Eigen::Index conv_filters = 4;
  Eigen::Index conv_kernel = 3;
  double min_seconds = 0.05;         ///< repeat each measurement until this much time has passed
  int trials = 3;                    ///< best of
  std::uint64_t seed = 42;
};

/// Times distance_matrix over N random items for each of `matrix_sizes`
/// (single-threaded) and conv2d_forward over W x W inputs for each of
/// `conv_sizes`, then fits power laws. Needs >= 3 sizes per series.
ScalingReport scaling_report(const std::vector<int>& matrix_sizes, const std::vector<int>& conv_sizes,
                             const ScalingOptions& opts = {});
ScalingReport scaling_report(const std::vector<int>& sizes, const ScalingOptions& opts = {});

}  // namespace ncdnet
