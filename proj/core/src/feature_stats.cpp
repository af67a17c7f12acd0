#include "moc/feature_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "moc/error.hpp"

namespace moc {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

FeatureMap::FeatureMap(int height, int width)
    : FeatureMap(MatrixXd::Zero(Index{kLatentChannels} * height, width)) {}

FeatureMap::FeatureMap(MatrixXd stacked, int channels) : channels_(channels), data_(std::move(stacked)) {
  if (channels_ < 1 || data_.rows() == 0 || data_.cols() == 0 || data_.rows() % channels_ != 0) {
    throw Error(ErrorKind::ShapeError, "feature map of " + std::to_string(data_.rows()) +
                                           " rows cannot hold " + std::to_string(channels_) +
                                           " stacked channels");
  }
  height_ = static_cast<int>(data_.rows() / channels_);
  width_ = static_cast<int>(data_.cols());
}

FeatureMapStack::FeatureMapStack(std::vector<FeatureMap> views, std::vector<double> azimuths)
    : views_(std::move(views)), azimuths_(std::move(azimuths)) {
  if (views_.empty()) throw Error(ErrorKind::InvalidInput, "feature stack has no views");
  if (views_.size() != azimuths_.size()) {
    throw Error(ErrorKind::DimMismatch, "feature stack has " + std::to_string(views_.size()) +
                                            " views but " + std::to_string(azimuths_.size()) +
                                            " azimuths");
  }
  const FeatureMap& first = views_.front();
  for (const FeatureMap& v : views_) {
    if (v.channels() != first.channels() || v.height() != first.height() ||
        v.width() != first.width()) {
      throw Error(ErrorKind::ShapeError, "feature maps in a stack must share (C, H, W)");
    }
  }
  for (std::size_t i = 0; i < azimuths_.size(); ++i) {
    const double a = azimuths_[i];
    if (!(a >= 0.0 && a < 360.0)) {
      throw Error(ErrorKind::InvalidInput, "azimuth " + std::to_string(a) + " outside [0, 360)");
    }
    if (i > 0 && !(a > azimuths_[i - 1])) {
      throw Error(ErrorKind::InvalidInput, "azimuths must be strictly increasing");
    }
  }
}

LuminanceWeights::LuminanceWeights(const std::array<double, kLatentChannels>& w) {
  const double sum = std::accumulate(w.begin(), w.end(), 0.0);
  if (!std::isfinite(sum) || sum == 0.0 ||
      std::any_of(w.begin(), w.end(), [](double v) { return !std::isfinite(v); })) {
    throw Error(ErrorKind::InvalidInput, "luminance weights must be finite with a non-zero sum");
  }
  for (std::size_t c = 0; c < w.size(); ++c) w_[c] = w[c] / sum;
}

LuminanceWeights LuminanceWeights::equal() { return LuminanceWeights({0.25, 0.25, 0.25, 0.25}); }

SampleMatrix::SampleMatrix(MatrixXd columns) : x_(std::move(columns)) {
  if (x_.rows() < 1 || x_.cols() < 1) {
    throw Error(ErrorKind::ShapeError, "sample matrix needs D >= 1 and M >= 1");
  }
}

VectorXd ExtendedDescriptor::mean() const {
  const Index d = feature_dim();
  return c.matrix().col(d).head(d);
}

MatrixXd ExtendedDescriptor::regularized_cov() const {
  const Index d = feature_dim();
  const VectorXd mu = mean();
  return c.matrix().topLeftCorner(d, d) - mu * mu.transpose();
}

MatrixXd luminance_compress(const FeatureMap& map, const LuminanceWeights& w) {
  if (map.channels() != kLatentChannels) {
    throw Error(ErrorKind::DimMismatch, "luminance compression expects 4 channels, got " +
                                            std::to_string(map.channels()));
  }
  if (!map.stacked().allFinite()) {
    throw Error(ErrorKind::InvalidInput, "feature map has non-finite entries");
  }
  MatrixXd g = w[0] * map.channel(0);
  for (int c = 1; c < kLatentChannels; ++c) g += w[c] * map.channel(c);
  return g;
}

SampleMatrix collect_patches(std::span<const MatrixXd> grays, int d) {
  if (grays.empty()) throw Error(ErrorKind::InvalidInput, "no grayscale maps to aggregate");
  if (d < 1) throw Error(ErrorKind::ShapeError, "patch side must be positive");
  const Index h = grays.front().rows();
  const Index w = grays.front().cols();
  for (const MatrixXd& g : grays) {
    if (g.rows() != h || g.cols() != w) {
      throw Error(ErrorKind::ShapeError, "grayscale maps must share a shape");
    }
  }
  if (h % d != 0 || w % d != 0) {
    throw Error(ErrorKind::ShapeError, "map of " + std::to_string(h) + "x" + std::to_string(w) +
                                           " is not divisible into " + std::to_string(d) + "x" +
                                           std::to_string(d) + " patches");
  }
  const Index rows = h / d;
  const Index cols = w / d;
  MatrixXd x(Index{d} * d, static_cast<Index>(grays.size()) * rows * cols);
  Index k = 0;
  for (const MatrixXd& g : grays) {
    for (Index pr = 0; pr < rows; ++pr) {
      for (Index pc = 0; pc < cols; ++pc, ++k) {
        for (Index y = 0; y < d; ++y)
          for (Index xx = 0; xx < d; ++xx) x(y * d + xx, k) = g(pr * d + y, pc * d + xx);
      }
    }
  }
  return SampleMatrix(std::move(x));
}

MomentPair mean_cov(const SampleMatrix& x) {
  const MatrixXd& cols = x.columns();
  const Index m = x.count_m();
  const Index dim = x.dim_d();
  if (m < 2) {
    throw Error(ErrorKind::InsufficientSamples,
                "covariance needs at least 2 samples, got " + std::to_string(m));
  }
  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    for (Index r = 0; r < dim; ++r) {
      if (cols(r, a) != cols(r, b)) return cols(r, a) < cols(r, b);
    }
    return false;
  });

  VectorXd mu = VectorXd::Zero(dim);
  for (Index k : order) mu += cols.col(k);
  mu /= static_cast<double>(m);

  MatrixXd cov = MatrixXd::Zero(dim, dim);
  for (Index k : order) {
    const VectorXd y = cols.col(k) - mu;
    cov.noalias() += y * y.transpose();
  }
  cov /= static_cast<double>(m);
  return {std::move(mu), 0.5 * (cov + cov.transpose())};
}

ExtendedDescriptor extended_spd(const MomentPair& m, double eps) {
  const Index d = m.mean.size();
  if (m.cov.rows() != d || m.cov.cols() != d) {
    throw Error(ErrorKind::DimMismatch, "mean and covariance dimensions disagree");
  }
  if (!m.mean.allFinite() || !m.cov.allFinite()) {
    throw Error(ErrorKind::InvalidInput, "moments have non-finite entries");
  }
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw Error(ErrorKind::InvalidInput, "Tikhonov eps must be positive");
  }
  MatrixXd c(d + 1, d + 1);
  c.topLeftCorner(d, d) = m.cov + m.mean * m.mean.transpose();
  c.topLeftCorner(d, d).diagonal().array() += eps;
  c.col(d).head(d) = m.mean;
  c.row(d).head(d) = m.mean.transpose();
  c(d, d) = 1.0;
  return {SpdMatrix(c), eps};
}

ExtendedDescriptor build_descriptor(const FeatureMapStack& stack, const LuminanceWeights& w,
                                    int d, double eps) {
  std::vector<MatrixXd> grays;
  grays.reserve(stack.size());
  for (const FeatureMap& f : stack.views()) grays.push_back(luminance_compress(f, w));
  return extended_spd(mean_cov(collect_patches(grays, d)), eps);
}

MatrixXd extended_spd_pullback(const SampleMatrix& x, const MomentPair& m,
                               const SymMatrix& grad_c) {
  const Index d = x.dim_d();
  if (grad_c.dim() != d + 1 || m.mean.size() != d) {
    throw Error(ErrorKind::DimMismatch, "descriptor gradient does not match the sample dimension");
  }
  const MatrixXd g11 = grad_c.matrix().topLeftCorner(d, d);
  const VectorXd g12 = grad_c.matrix().col(d).head(d);
  const double inv_m = 1.0 / static_cast<double>(x.count_m());
  // dC_11 = dSigma + dmu mu^T + mu dmu^T and C_12 = C_21^T = mu.
  const VectorXd grad_mu = 2.0 * (g11 * m.mean) + 2.0 * g12;
  // The centering term of dSigma/dmu sums to zero over samples.
  MatrixXd grad_x = (2.0 * inv_m) * (g11 * (x.columns().colwise() - m.mean));
  grad_x.colwise() += inv_m * grad_mu;
  return grad_x;
}

std::vector<MatrixXd> patches_pullback(const MatrixXd& grad_x, std::size_t views, int height,
                                       int width, int d) {
  const Index rows = height / d;
  const Index cols = width / d;
  if (grad_x.rows() != Index{d} * d || grad_x.cols() != static_cast<Index>(views) * rows * cols) {
    throw Error(ErrorKind::DimMismatch, "patch gradient does not match the stack layout");
  }
  std::vector<MatrixXd> out(views, MatrixXd::Zero(height, width));
  Index k = 0;
  for (MatrixXd& g : out) {
    for (Index pr = 0; pr < rows; ++pr) {
      for (Index pc = 0; pc < cols; ++pc, ++k) {
        for (Index y = 0; y < d; ++y)
          for (Index xx = 0; xx < d; ++xx) g(pr * d + y, pc * d + xx) = grad_x(y * d + xx, k);
      }
    }
  }
  return out;
}

FeatureMap luminance_pullback(const MatrixXd& grad_gray, const LuminanceWeights& w) {
  FeatureMap out(static_cast<int>(grad_gray.rows()), static_cast<int>(grad_gray.cols()));
  for (int c = 0; c < kLatentChannels; ++c) out.channel(c) = w[c] * grad_gray;
  return out;
}

}  // namespace moc
