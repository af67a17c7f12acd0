#include "moc/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "moc/harness.hpp"
#include "moc/random.hpp"
#include "moc/spd_geometry.hpp"
#include "moc/view_order.hpp"

namespace moc {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

std::vector<double> view_azimuths(Index k) {
  std::vector<double> az;
  for (Index i = 1; i <= k; ++i) az.push_back(180.0 * static_cast<double>(i) / static_cast<double>(k));
  return az;
}

double svo_of(const MatrixXd& raw, const std::vector<double>& az, double delta) {
  const VectorXd s = similarities(ViewEmbeddingSequence(raw, az));
  return svo_loss(s, delta).loss;
}

bool near_kink(const MatrixXd& raw, const std::vector<double>& az, double delta) {
  const VectorXd s = similarities(ViewEmbeddingSequence(raw, az));
  for (Index i = 0; i + 1 < s.size(); ++i) {
    if (std::abs(s(i + 1) - s(i) + delta) < kKinkExclusion) return true;
  }
  return false;
}

void accumulate(GradCheckResult& r, const MatrixXd& analytic, const MatrixXd& numeric) {
  ++r.instances;
  r.max_rel_err = std::max(r.max_rel_err, relative_error(analytic, numeric));
  r.max_abs_grad = std::max(r.max_abs_grad, analytic.cwiseAbs().maxCoeff());
}

void finish(GradCheckResult& r) { r.pass = r.instances > 0 && r.max_rel_err < r.tolerance; }

}  // namespace

MatrixXd central_difference(const std::function<double(const MatrixXd&)>& f, const MatrixXd& x,
                            double h) {
  MatrixXd g(x.rows(), x.cols());
  MatrixXd probe = x;
  for (Index j = 0; j < x.cols(); ++j) {
    for (Index i = 0; i < x.rows(); ++i) {
      const double orig = probe(i, j);
      probe(i, j) = orig + h;
      const double up = f(probe);
      probe(i, j) = orig - h;
      const double down = f(probe);
      probe(i, j) = orig;
      g(i, j) = (up - down) / (2.0 * h);
    }
  }
  return g;
}

double relative_error(const MatrixXd& a, const MatrixXd& b) {
  const double scale = std::max(a.norm(), b.norm());
  if (scale == 0.0) return 0.0;
  return (a - b).norm() / scale;
}

GradCheckResult check_spd_gradient(std::uint64_t seed, int instances, double tolerance) {
  GradCheckResult r{.target = "spd", .tolerance = tolerance};
  CounterRng rng(seed);
  for (int n = 0; n < instances; ++n) {
    const Index dim = 2 + static_cast<Index>(rng.next_u64() % 5);
    const double eps = (rng.next_u64() % 2 == 0) ? 0.0 : 1e-6;
    const MatrixXd a = random_spd(rng, dim, 1e2);
    const SpdMatrix tgt(random_spd(rng, dim, 1e2));
    const MatrixXd analytic = grad_r_spd(SpdMatrix(a), tgt, eps).matrix();
    const MatrixXd numeric = central_difference(
        [&](const MatrixXd& m) { return lem_distance_sq(SpdMatrix(m), tgt, eps); }, a);
    accumulate(r, analytic, numeric);
  }
  finish(r);
  return r;
}

GradCheckResult check_svo_gradient(std::uint64_t seed, int instances, double tolerance) {
  GradCheckResult r{.target = "svo", .tolerance = tolerance};
  CounterRng rng(seed);
  while (r.instances < instances) {
    const Index k = 2 + static_cast<Index>(rng.next_u64() % 5);
    const Index dim = 2 + static_cast<Index>(rng.next_u64() % 7);
    const double delta = rng.uniform(0.0, 0.2);
    const std::vector<double> az = view_azimuths(k);
    const MatrixXd raw = random_normal(rng, k + 1, dim);
    if (near_kink(raw, az, delta)) continue;
    const MatrixXd analytic = svo_grad(ViewEmbeddingSequence(raw, az), delta);
    const MatrixXd numeric =
        central_difference([&](const MatrixXd& m) { return svo_of(m, az, delta); }, raw);
    accumulate(r, analytic, numeric);
  }
  finish(r);
  return r;
}

GradCheckResult check_svo_satisfied(std::uint64_t seed, double tolerance) {
  GradCheckResult r{.target = "svo-satisfied", .tolerance = tolerance};
  CounterRng rng(seed);
  const Index k = 4;
  const Index dim = 8;
  const double delta = kDefaultMargin;
  const std::vector<double> az = view_azimuths(k);
  // Views rotate away from the reference in a plane, so similarities are
  // cos(az) and drop by more than 0.29 between adjacent views.
  const MatrixXd q = random_orthogonal(rng, dim);
  MatrixXd raw(k + 1, dim);
  raw.row(0) = rng.uniform(0.5, 2.0) * q.col(0).transpose();
  for (Index i = 0; i < k; ++i) {
    const double theta = az[static_cast<std::size_t>(i)] * std::numbers::pi / 180.0;
    raw.row(i + 1) = rng.uniform(0.5, 2.0) * (std::cos(theta) * q.col(0) + std::sin(theta) * q.col(1)).transpose();
  }
  const MatrixXd analytic = svo_grad(ViewEmbeddingSequence(raw, az), delta);
  const MatrixXd numeric = central_difference([&](const MatrixXd& m) { return svo_of(m, az, delta); }, raw);
  accumulate(r, analytic, numeric);
  finish(r);
  return r;
}

GradCheckResult check_harness_gradient(std::uint64_t seed, int points, double tolerance) {
  GradCheckResult r{.target = "harness", .tolerance = tolerance};
  HarnessConfig cfg;
  cfg.seed = seed;
  const SceneModel model = make_scene(cfg);
  CounterRng rng = CounterRng(seed).split(0x6772616463686b);
  const Index rows = static_cast<Index>(model.azimuths.size());
  const Index d_clip = cfg.scene.d_clip;
  const Index tex_dim = cfg.scene.tex_dim;

  auto unpack = [&](const MatrixXd& flat) {
    SceneParams p;
    p.embed = flat.topRows(rows * d_clip).reshaped(d_clip, rows).transpose();
    p.tex = flat.bottomRows(tex_dim).col(0);
    return p;
  };
  auto pack = [&](const SceneParams& p) {
    MatrixXd flat(rows * d_clip + tex_dim, 1);
    flat.topRows(rows * d_clip) = p.embed.transpose().reshaped(rows * d_clip, 1);
    flat.bottomRows(tex_dim) = p.tex;
    return flat;
  };

  const std::vector<double> views(model.azimuths.begin() + 1, model.azimuths.end());
  while (r.instances < points) {
    SceneParams p{random_normal(rng, rows, d_clip), random_normal(rng, tex_dim, 1)};
    const int t = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(cfg.schedule.total_steps + 1));
    if (near_kink(p.embed, views, model.margin)) continue;
    const Evaluation ev = evaluate(model, p, t, cfg.schedule);
    const MatrixXd analytic = pack(ev.grad);
    const MatrixXd numeric = central_difference(
        [&](const MatrixXd& flat) { return evaluate(model, unpack(flat), t, cfg.schedule, false).loss.total; },
        pack(p));
    accumulate(r, analytic, numeric);
  }
  finish(r);
  return r;
}

}  // namespace moc
