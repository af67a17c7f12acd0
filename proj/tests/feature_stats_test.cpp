#include "moc/feature_stats.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "moc/gradcheck.hpp"
#include "moc/random.hpp"
#include "support/oracles.hpp"
#include "support/test_helpers.hpp"

namespace moc {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

FeatureMap random_map(CounterRng& rng, int h, int w) {
  return FeatureMap(random_normal(rng, 4 * h, w));
}

FeatureMapStack random_stack(CounterRng& rng, int views, int h, int w) {
  std::vector<FeatureMap> maps;
  std::vector<double> az;
  for (int v = 0; v < views; ++v) {
    maps.push_back(random_map(rng, h, w));
    az.push_back(360.0 * v / views);
  }
  return FeatureMapStack(std::move(maps), std::move(az));
}

std::vector<MatrixXd> stacked(const FeatureMapStack& s) {
  std::vector<MatrixXd> out;
  for (const auto& f : s.views()) out.push_back(f.stacked());
  return out;
}

TEST(LuminanceCompress, Examples) {
  const auto w = LuminanceWeights::equal();
  FeatureMap ones(MatrixXd::Ones(12, 3));
  EXPECT_EQ(luminance_compress(ones, w), MatrixXd::Ones(3, 3));

  FeatureMap single(1, 1);
  single.at(0, 0, 0) = 1.0;
  EXPECT_DOUBLE_EQ(luminance_compress(single, w)(0, 0), 0.25);

  FeatureMap ramp(2, 2);
  for (int c = 0; c < 4; ++c) ramp.channel(c).setConstant(c);
  EXPECT_EQ(luminance_compress(ramp, w), MatrixXd::Constant(2, 2, 1.5));
}

TEST(LuminanceCompress, RejectsWrongChannelCount) {
  const FeatureMap three(MatrixXd::Ones(6, 2), 3);
  EXPECT_THROW_KIND(luminance_compress(three, LuminanceWeights::equal()), ErrorKind::DimMismatch);
}

TEST(LuminanceCompress, IsLinear) {
  CounterRng rng(7);
  const LuminanceWeights w({0.1, 0.2, 0.3, 0.4});
  for (int n = 0; n < 20; ++n) {
    const FeatureMap f = random_map(rng, 4, 5);
    const FeatureMap g = random_map(rng, 4, 5);
    const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
    const FeatureMap mix(a * f.stacked() + b * g.stacked());
    const MatrixXd lhs = luminance_compress(mix, w);
    const MatrixXd rhs = a * luminance_compress(f, w) + b * luminance_compress(g, w);
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(LuminanceWeights, NormalizesToUnitSum) {
  const LuminanceWeights w({1.0, 1.0, 2.0, 4.0});
  EXPECT_DOUBLE_EQ(w[3], 0.5);
  EXPECT_NEAR(w[0] + w[1] + w[2] + w[3], 1.0, 1e-12);
  EXPECT_THROW_KIND(LuminanceWeights({1.0, -1.0, 0.0, 0.0}), ErrorKind::InvalidInput);
}

TEST(CollectPatches, SinglePatch) {
  const MatrixXd g = (Eigen::Matrix2d() << 1, 2, 3, 4).finished();
  const std::vector<MatrixXd> maps{g};
  const SampleMatrix x = collect_patches(maps, 2);
  ASSERT_EQ(x.dim_d(), 4);
  ASSERT_EQ(x.count_m(), 1);
  EXPECT_EQ(x.columns().col(0), (Eigen::Vector4d() << 1, 2, 3, 4).finished());
}

TEST(CollectPatches, RowMajorPatchOrderAndViewMajor) {
  MatrixXd g(4, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) g(y, x) = 10 * y + x;
  const std::vector<MatrixXd> one{g};
  const SampleMatrix x = collect_patches(one, 2);
  ASSERT_EQ(x.count_m(), 4);
  EXPECT_EQ(x.columns().col(0), (Eigen::Vector4d() << 0, 1, 10, 11).finished());
  EXPECT_EQ(x.columns().col(1), (Eigen::Vector4d() << 2, 3, 12, 13).finished());
  EXPECT_EQ(x.columns().col(2), (Eigen::Vector4d() << 20, 21, 30, 31).finished());
  EXPECT_EQ(x.columns().col(3), (Eigen::Vector4d() << 22, 23, 32, 33).finished());

  const std::vector<MatrixXd> two{g, g.array() + 100.0};
  const SampleMatrix xx = collect_patches(two, 2);
  ASSERT_EQ(xx.count_m(), 8);
  EXPECT_EQ(xx.columns().leftCols(4), x.columns());
  EXPECT_EQ(xx.columns().rightCols(4), (x.columns().array() + 100.0).matrix());
}

TEST(CollectPatches, IndivisibleIsShapeError) {
  const std::vector<MatrixXd> maps{MatrixXd::Zero(5, 4)};
  EXPECT_THROW_KIND(collect_patches(maps, 2), ErrorKind::ShapeError);
}

TEST(MeanCov, Examples) {
  MatrixXd same(3, 4);
  same.colwise() = Eigen::Vector3d(1, 2, 3);
  const MomentPair m = mean_cov(SampleMatrix(same));
  EXPECT_EQ(m.mean, Eigen::Vector3d(1, 2, 3));
  EXPECT_EQ(m.cov, MatrixXd::Zero(3, 3));

  const MomentPair p = mean_cov(SampleMatrix((MatrixXd(1, 2) << 0.0, 2.0).finished()));
  EXPECT_DOUBLE_EQ(p.mean(0), 1.0);
  EXPECT_DOUBLE_EQ(p.cov(0, 0), 1.0);
}

TEST(MeanCov, MatchesDirectSummationOracle) {
  CounterRng rng(12);
  for (int n = 0; n < 20; ++n) {
    const MatrixXd x = random_normal(rng, 3, 5);
    const MomentPair m = mean_cov(SampleMatrix(x));
    const auto [mu, cov] = testing::direct_mean_cov(x);
    EXPECT_LT((m.mean - mu).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((m.cov - cov).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(MeanCov, ColumnOrderDoesNotChangeBits) {
  CounterRng rng(13);
  const MatrixXd x = random_normal(rng, 6, 17);
  MatrixXd reversed = x.rowwise().reverse();
  const MomentPair a = mean_cov(SampleMatrix(x));
  const MomentPair b = mean_cov(SampleMatrix(reversed));
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.cov, b.cov);
}

TEST(MeanCov, NeedsTwoSamples) {
  EXPECT_THROW_KIND(mean_cov(SampleMatrix(MatrixXd::Ones(3, 1))), ErrorKind::InsufficientSamples);
}

TEST(ExtendedSpd, ZeroMeanBlockForm) {
  const MomentPair m{VectorXd::Zero(2), MatrixXd::Identity(2, 2)};
  const ExtendedDescriptor d = extended_spd(m, 1e-6);
  const MatrixXd expected = Eigen::Vector3d(1 + 1e-6, 1 + 1e-6, 1).asDiagonal();
  EXPECT_EQ(d.c.matrix(), expected);
  EXPECT_EQ(d.eps, 1e-6);
}

TEST(ExtendedSpd, ScalarSubstitution) {
  const MomentPair m{VectorXd::Ones(1), MatrixXd::Zero(1, 1)};
  const ExtendedDescriptor d = extended_spd(m, 1e-6);
  const MatrixXd expected = (Eigen::Matrix2d() << 1 + 1e-6, 1, 1, 1).finished();
  EXPECT_EQ(d.c.matrix(), expected);
  EXPECT_EQ(d.c.matrix()(1, 1), 1.0);
}

TEST(ExtendedSpd, MeanOuterProductArithmetic) {
  const double eps = 1e-6;
  const MomentPair m{Eigen::Vector2d(1, 2), MatrixXd::Identity(2, 2)};
  const ExtendedDescriptor d = extended_spd(m, eps);
  MatrixXd expected = (Eigen::Matrix3d() << 2, 2, 1, 2, 5, 2, 1, 2, 1).finished();
  expected(0, 0) += eps;
  expected(1, 1) += eps;
  EXPECT_LT((d.c.matrix() - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(d.mean(), Eigen::Vector2d(1, 2));
  EXPECT_LT((d.regularized_cov() - (1 + eps) * MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ExtendedSpd, Errors) {
  MomentPair bad{VectorXd::Zero(2), MatrixXd::Identity(2, 2)};
  bad.mean(0) = std::nan("");
  EXPECT_THROW_KIND(extended_spd(bad, 1e-6), ErrorKind::InvalidInput);
  const MomentPair ok{VectorXd::Zero(2), MatrixXd::Identity(2, 2)};
  EXPECT_THROW_KIND(extended_spd(ok, 0.0), ErrorKind::InvalidInput);
  EXPECT_THROW_KIND(extended_spd(MomentPair{VectorXd::Zero(3), MatrixXd::Identity(2, 2)}, 1e-6),
                    ErrorKind::DimMismatch);
}

TEST(BuildDescriptor, ConstantStackHasEpsCovariance) {
  const double k = 0.75;
  std::vector<FeatureMap> maps(3, FeatureMap(MatrixXd::Constant(32, 8, k)));
  const FeatureMapStack stack(maps, {0.0, 90.0, 180.0});
  const ExtendedDescriptor d = build_descriptor(stack, LuminanceWeights::equal(), 4, 1e-6);
  EXPECT_EQ(d.c.dim(), 17);
  EXPECT_LT((d.mean() - VectorXd::Constant(16, k)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((d.regularized_cov() - 1e-6 * MatrixXd::Identity(16, 16)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(d.c.matrix()(16, 16), 1.0);
}

TEST(BuildDescriptor, MatchesStraightLineOracle) {
  CounterRng rng(31);
  const double w[4] = {0.1, 0.4, 0.3, 0.2};
  for (int n = 0; n < 10; ++n) {
    const FeatureMapStack stack = random_stack(rng, 5, 8, 8);
    const ExtendedDescriptor d = build_descriptor(stack, LuminanceWeights({w[0], w[1], w[2], w[3]}), 4, 1e-6);
    const MatrixXd oracle = testing::straight_line_descriptor(stacked(stack), 8, 8, w, 4, 1e-6);
    EXPECT_LT((d.c.matrix() - oracle).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(BuildDescriptor, ViewPermutationInvarianceIsExact) {
  CounterRng rng(32);
  for (int n = 0; n < 10; ++n) {
    const FeatureMapStack stack = random_stack(rng, 5, 8, 8);
    std::vector<FeatureMap> perm(stack.views().rbegin(), stack.views().rend());
    std::rotate(perm.begin(), perm.begin() + 2, perm.end());
    const FeatureMapStack permuted(perm, stack.azimuths());
    const auto w = LuminanceWeights::equal();
    EXPECT_EQ(build_descriptor(stack, w, 4, 1e-6).c.matrix(), build_descriptor(permuted, w, 4, 1e-6).c.matrix());
  }
}

TEST(BuildDescriptor, ConstantShiftMovesMeanOnly) {
  CounterRng rng(33);
  const auto w = LuminanceWeights::equal();
  for (int n = 0; n < 10; ++n) {
    const FeatureMapStack stack = random_stack(rng, 3, 8, 8);
    const double s = rng.uniform(-3, 3);
    std::vector<FeatureMap> shifted;
    for (const auto& f : stack.views()) shifted.emplace_back((f.stacked().array() + s).matrix());
    const ExtendedDescriptor a = build_descriptor(stack, w, 4, 1e-6);
    const ExtendedDescriptor b = build_descriptor(FeatureMapStack(shifted, stack.azimuths()), w, 4, 1e-6);
    EXPECT_LT((b.mean() - a.mean() - VectorXd::Constant(16, s)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((b.regularized_cov() - a.regularized_cov()).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(BuildDescriptor, StrictlyPdWithSchurDeterminant) {
  CounterRng rng(34);
  for (double eps : {1e-12, 1e-6}) {
    for (int n = 0; n < 25; ++n) {
      const FeatureMapStack stack = random_stack(rng, 5, 8, 8);
      const ExtendedDescriptor d = build_descriptor(stack, LuminanceWeights::equal(), 4, eps);
      EXPECT_GT(d.c.min_eigenvalue(), 0.0);
      const double det_c = d.c.matrix().determinant();
      const double det_s = d.regularized_cov().determinant();
      EXPECT_LT(std::abs(det_c - det_s) / std::abs(det_s), 1e-8);
    }
  }
}

TEST(FeatureMapStack, Validation) {
  const FeatureMap f(4, 4);
  EXPECT_THROW_KIND(FeatureMapStack({f, f}, {90.0, 45.0}), ErrorKind::InvalidInput);
  EXPECT_THROW_KIND(FeatureMapStack({f, f}, {0.0, 360.0}), ErrorKind::InvalidInput);
  EXPECT_THROW_KIND(FeatureMapStack({f, FeatureMap(4, 8)}, {0.0, 90.0}), ErrorKind::ShapeError);
  EXPECT_THROW_KIND(FeatureMapStack({f}, {0.0, 90.0}), ErrorKind::DimMismatch);
}

TEST(Pullbacks, ExtendedSpdPullbackMatchesFiniteDifferences) {
  CounterRng rng(41);
  for (int n = 0; n < 10; ++n) {
    const MatrixXd x = random_normal(rng, 3, 7);
    const SymMatrix g(random_normal(rng, 4, 4));
    const auto contract = [&](const MatrixXd& xs) {
      return g.matrix().cwiseProduct(extended_spd(mean_cov(SampleMatrix(xs)), 1e-6).c.matrix()).sum();
    };
    const SampleMatrix sx(x);
    const MatrixXd analytic = extended_spd_pullback(sx, mean_cov(sx), g);
    const MatrixXd numeric = central_difference(contract, x);
    EXPECT_LT(relative_error(analytic, numeric), 1e-7);
  }
}

TEST(Pullbacks, PatchAndLuminancePullbacksAreAdjoints) {
  CounterRng rng(42);
  const std::vector<MatrixXd> grays{random_normal(rng, 8, 4), random_normal(rng, 8, 4)};
  const SampleMatrix x = collect_patches(grays, 2);
  const MatrixXd y = random_normal(rng, x.dim_d(), x.count_m());
  const auto back = patches_pullback(y, 2, 8, 4, 2);
  const double lhs = x.columns().cwiseProduct(y).sum();
  const double rhs = grays[0].cwiseProduct(back[0]).sum() + grays[1].cwiseProduct(back[1]).sum();
  EXPECT_NEAR(lhs, rhs, 1e-12 * std::abs(lhs));

  const LuminanceWeights w({0.1, 0.2, 0.3, 0.4});
  const FeatureMap f = random_map(rng, 3, 5);
  const MatrixXd gy = random_normal(rng, 3, 5);
  const double l2 = luminance_compress(f, w).cwiseProduct(gy).sum();
  const double r2 = f.stacked().cwiseProduct(luminance_pullback(gy, w).stacked()).sum();
  EXPECT_NEAR(l2, r2, 1e-12 * std::abs(l2));
}

}  // namespace
}  // namespace moc
