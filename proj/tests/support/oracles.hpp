#pragma once

// Test-only reference implementations. These deliberately avoid the library
// code paths they are compared against: plain loops, textbook formulas.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "moc/feature_stats.hpp"

namespace moc::testing {

/// Mean and population covariance by direct double loops.
inline std::pair<Eigen::VectorXd, Eigen::MatrixXd> direct_mean_cov(const Eigen::MatrixXd& x) {
  const long d = x.rows();
  const long m = x.cols();
  Eigen::VectorXd mu(d);
  for (long i = 0; i < d; ++i) {
    double s = 0.0;
    for (long k = 0; k < m; ++k) s += x(i, k);
    mu(i) = s / static_cast<double>(m);
  }
  Eigen::MatrixXd cov(d, d);
  for (long i = 0; i < d; ++i) {
    for (long j = 0; j < d; ++j) {
      double s = 0.0;
      for (long k = 0; k < m; ++k) s += (x(i, k) - mu(i)) * (x(j, k) - mu(j));
      cov(i, j) = s / static_cast<double>(m);
    }
  }
  return {mu, cov};
}

/// Straight-line descriptor pipeline: per-pixel luminance, index-arithmetic
/// patch extraction, direct moments and explicit block assembly.
inline Eigen::MatrixXd straight_line_descriptor(const std::vector<Eigen::MatrixXd>& stacked_maps,
                                                int height, int width, const double (&w)[4], int d,
                                                double eps) {
  const int dim = d * d;
  const int per_row = width / d;
  const int per_view = (height / d) * per_row;
  const int m = static_cast<int>(stacked_maps.size()) * per_view;
  const double wsum = w[0] + w[1] + w[2] + w[3];
  Eigen::MatrixXd x(dim, m);
  for (std::size_t v = 0; v < stacked_maps.size(); ++v) {
    for (int y = 0; y < height; ++y) {
      for (int xx = 0; xx < width; ++xx) {
        double g = 0.0;
        for (int c = 0; c < 4; ++c) g += (w[c] / wsum) * stacked_maps[v](c * height + y, xx);
        const int patch = static_cast<int>(v) * per_view + (y / d) * per_row + (xx / d);
        x((y % d) * d + (xx % d), patch) = g;
      }
    }
  }
  const auto [mu, cov] = direct_mean_cov(x);
  Eigen::MatrixXd c(dim + 1, dim + 1);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) c(i, j) = cov(i, j) + (i == j ? eps : 0.0) + mu(i) * mu(j);
    c(i, dim) = mu(i);
    c(dim, i) = mu(i);
  }
  c(dim, dim) = 1.0;
  return c;
}

}  // namespace moc::testing
