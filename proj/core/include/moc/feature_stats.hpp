#pragma once

// Extended SPD descriptor of a multi-view feature stack:
//
//   4xHxW maps --luminance--> HxW gray maps --dxd patches--> X (D x M)
//   --> (mu, Sigma) --> C = [[Sigma + eps I + mu mu^T, mu], [mu^T, 1]]
//
// plus the vector-Jacobian products needed to pull a gradient on C back to
// the feature maps.

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "moc/spd_geometry.hpp"

namespace moc {

inline constexpr int kLatentChannels = 4;
inline constexpr int kDefaultPatch = 4;
inline constexpr double kDefaultEps = 1e-6;

/// A 4xHxW latent feature map stored as a (4H) x W matrix with the channels
/// stacked vertically (channel c occupies rows [cH, (c+1)H)).
class FeatureMap {
 public:
  FeatureMap(int height, int width);
  explicit FeatureMap(Eigen::MatrixXd stacked, int channels = kLatentChannels);

  int channels() const noexcept { return channels_; }
  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }

  const Eigen::MatrixXd& stacked() const noexcept { return data_; }
  Eigen::MatrixXd& stacked() noexcept { return data_; }

  auto channel(int c) const { return data_.block(Eigen::Index{c} * height_, 0, height_, width_); }
  auto channel(int c) { return data_.block(Eigen::Index{c} * height_, 0, height_, width_); }

  double& at(int c, int y, int x) { return data_(Eigen::Index{c} * height_ + y, x); }
  double at(int c, int y, int x) const { return data_(Eigen::Index{c} * height_ + y, x); }

 private:
  int channels_;
  int height_;
  int width_;
  Eigen::MatrixXd data_;
};

/// Views with strictly increasing azimuths in [0, 360) and a common shape.
class FeatureMapStack {
 public:
  FeatureMapStack(std::vector<FeatureMap> views, std::vector<double> azimuths);

  std::size_t size() const noexcept { return views_.size(); }
  const std::vector<FeatureMap>& views() const noexcept { return views_; }
  const std::vector<double>& azimuths() const noexcept { return azimuths_; }
  int height() const noexcept { return views_.front().height(); }
  int width() const noexcept { return views_.front().width(); }

 private:
  std::vector<FeatureMap> views_;
  std::vector<double> azimuths_;
};

/// Channel weights for grayscale compression, normalized to sum to one.
class LuminanceWeights {
 public:
  explicit LuminanceWeights(const std::array<double, kLatentChannels>& w);
  static LuminanceWeights equal();

  double operator[](int c) const { return w_[static_cast<std::size_t>(c)]; }
  const std::array<double, kLatentChannels>& values() const noexcept { return w_; }

 private:
  std::array<double, kLatentChannels> w_;
};

/// D x M sample matrix, one sample per column.
class SampleMatrix {
 public:
  explicit SampleMatrix(Eigen::MatrixXd columns);

  Eigen::Index dim_d() const noexcept { return x_.rows(); }
  Eigen::Index count_m() const noexcept { return x_.cols(); }
  const Eigen::MatrixXd& columns() const noexcept { return x_; }

 private:
  Eigen::MatrixXd x_;
};

struct MomentPair {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

struct ExtendedDescriptor {
  SpdMatrix c;
  double eps;

  Eigen::Index feature_dim() const noexcept { return c.dim() - 1; }
  /// The mean embedded in the last column.
  Eigen::VectorXd mean() const;
  /// Sigma + eps I recovered from the top-left block.
  Eigen::MatrixXd regularized_cov() const;
};

Eigen::MatrixXd luminance_compress(const FeatureMap& map, const LuminanceWeights& w);

/// Non-overlapping d x d patches flattened row-major; view-major, then
/// row-major over the patch grid.
SampleMatrix collect_patches(std::span<const Eigen::MatrixXd> grays, int d);

/// Population mean and covariance (divisor M). Columns are accumulated in
/// lexicographic order so the result does not depend on column order.
MomentPair mean_cov(const SampleMatrix& x);

ExtendedDescriptor extended_spd(const MomentPair& m, double eps);

ExtendedDescriptor build_descriptor(const FeatureMapStack& stack, const LuminanceWeights& w,
                                    int d, double eps);

// Vector-Jacobian products, in reverse pipeline order.

/// dL/dX given dL/dC (entry-grid convention) for C = extended_spd(mean_cov(X)).
Eigen::MatrixXd extended_spd_pullback(const SampleMatrix& x, const MomentPair& m,
                                      const SymMatrix& grad_c);

/// Inverse of collect_patches' layout: scatter per-column gradients back to
/// per-view H x W maps.
std::vector<Eigen::MatrixXd> patches_pullback(const Eigen::MatrixXd& grad_x, std::size_t views,
                                              int height, int width, int d);

FeatureMap luminance_pullback(const Eigen::MatrixXd& grad_gray, const LuminanceWeights& w);

}  // namespace moc
