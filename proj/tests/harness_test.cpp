#include "moc/harness.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>

#include "moc/gradcheck.hpp"
#include "moc/io.hpp"
#include "support/test_helpers.hpp"

namespace moc {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

HarnessConfig small_config(int iterations) {
  HarnessConfig cfg;
  cfg.schedule = ScheduleConfig::defaults(iterations);
  cfg.optimizer.iterations = iterations;
  return cfg;
}

// Rows at angles 0, 40, 80, ... degrees in one plane: similarities to the
// reference fall by far more than the default margin between neighbours.
MatrixXd ordered_embeddings(int rows, int dim) {
  MatrixXd e = MatrixXd::Zero(rows, dim);
  for (int r = 0; r < rows; ++r) {
    const double a = r * (2.0 * std::numbers::pi / 9.0);
    e(r, 0) = std::cos(a);
    e(r, 1) = std::sin(a);
  }
  return e;
}

TEST(HarnessConfig, Validation) {
  EXPECT_NO_THROW(HarnessConfig{}.validate());
  HarnessConfig c;
  c.scene.patch = 3;
  EXPECT_THROW_KIND(c.validate(), ErrorKind::ConfigError);
  c = HarnessConfig{};
  c.scene.azimuths = {10.0, 45.0, 90.0, 135.0, 180.0};
  EXPECT_THROW_KIND(c.validate(), ErrorKind::ConfigError);
  c = HarnessConfig{};
  c.scene.views = 4;
  EXPECT_THROW_KIND(c.validate(), ErrorKind::ConfigError);
  c = HarnessConfig{};
  c.optimizer.iterations = c.schedule.total_steps + 1;
  EXPECT_THROW_KIND(c.validate(), ErrorKind::ConfigError);
}

TEST(RenderViews, LinearInTexture) {
  const HarnessConfig cfg;
  const SceneModel model = make_scene(cfg);
  SceneParams p = initial_params(model, cfg);
  const RenderedViews a = render_views(p, model);
  SceneParams doubled = p;
  doubled.tex *= 2.0;
  const RenderedViews b = render_views(doubled, model);
  SceneParams zero = p;
  zero.tex.setZero();
  const RenderedViews z = render_views(zero, model);
  ASSERT_EQ(a.stack.size(), 5u);
  for (std::size_t v = 0; v < a.stack.size(); ++v) {
    EXPECT_EQ(b.stack.views()[v].stacked(), 2.0 * a.stack.views()[v].stacked());
    EXPECT_EQ(z.stack.views()[v].stacked().cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(a.stack.views()[v].stacked().rows(), 4 * 8);
    EXPECT_EQ(a.stack.views()[v].stacked().cols(), 8);
  }
  for (Eigen::Index r = 0; r < p.embed.rows(); ++r) {
    EXPECT_NEAR(a.embeddings.unit().row(r).norm(), 1.0, 1e-15);
  }
}

TEST(RenderViews, ReshapeIsRowMajorPerChannel) {
  const HarnessConfig cfg;
  const SceneModel model = make_scene(cfg);
  const SceneParams p = initial_params(model, cfg);
  const RenderedViews r = render_views(p, model);
  const VectorXd flat = model.view_maps[2] * p.tex;
  const FeatureMap& f = r.stack.views()[2];
  for (int c = 0; c < 4; ++c)
    for (int y = 0; y < 8; ++y)
      for (int x = 0; x < 8; ++x) EXPECT_EQ(f.at(c, y, x), flat((c * 8 + y) * 8 + x));
}

TEST(RenderViews, Deterministic) {
  const HarnessConfig cfg;
  const SceneModel m1 = make_scene(cfg);
  const SceneModel m2 = make_scene(cfg);
  const SceneParams p1 = initial_params(m1, cfg);
  const SceneParams p2 = initial_params(m2, cfg);
  EXPECT_EQ(p1.embed, p2.embed);
  EXPECT_EQ(p1.tex, p2.tex);
  const RenderedViews a = render_views(p1, m1);
  const RenderedViews b = render_views(p2, m2);
  for (std::size_t v = 0; v < a.stack.size(); ++v) {
    EXPECT_EQ(a.stack.views()[v].stacked(), b.stack.views()[v].stacked());
  }
  EXPECT_EQ(a.embeddings.raw(), b.embeddings.raw());
}

TEST(RenderViews, ShapeMismatch) {
  const HarnessConfig cfg;
  const SceneModel model = make_scene(cfg);
  SceneParams p = initial_params(model, cfg);
  p.tex = VectorXd::Zero(7);
  EXPECT_THROW_KIND(render_views(p, model), ErrorKind::DimMismatch);
  p = initial_params(model, cfg);
  p.embed = MatrixXd::Ones(3, 16);
  EXPECT_THROW_KIND(render_views(p, model), ErrorKind::DimMismatch);
}

TEST(InitialParams, JanusPlacesBackViewNextToFront) {
  const HarnessConfig cfg;
  const SceneModel model = make_scene(cfg);
  const SceneParams p = initial_params(model, cfg);
  const VectorXd sims = similarities(render_views(p, model).embeddings);
  EXPECT_GT(sims(sims.size() - 1), 0.99);
  EXPECT_GT(svo_loss(sims, cfg.margin).loss, 0.0);
}

TEST(RunOptimization, ZeroWeightsLeaveParametersUnchanged) {
  HarnessConfig cfg = small_config(50);
  cfg.schedule.svo_initial = cfg.schedule.svo_final = 0.0;
  cfg.schedule.spd_base = cfg.schedule.spd_peak = 0.0;
  const SceneModel model = make_scene(cfg);
  const SceneParams init = initial_params(model, cfg);
  const OptimizationTrace trace = run_optimization(model, init, cfg.schedule, cfg.optimizer);
  ASSERT_EQ(trace.records.size(), 51u);
  EXPECT_EQ(trace.final_params.embed, init.embed);
  EXPECT_EQ(trace.final_params.tex, init.tex);
  for (const TraceRecord& r : trace.records) {
    EXPECT_EQ(r.total, 0.0);
    EXPECT_EQ(r.r_svo, trace.records[0].r_svo);
    EXPECT_EQ(r.r_spd, trace.records[0].r_spd);
    EXPECT_EQ(r.lem_dist, trace.records[0].lem_dist);
  }
  const ConvergenceReport rep = check_convergence(trace, 1e-3, true);
  EXPECT_EQ(rep.spd_converged, trace.records[0].lem_dist <= 1e-3);
  EXPECT_FALSE(rep.spd_converged);
  EXPECT_TRUE(rep.total_decreased);
}

TEST(RunOptimization, GlobalMinimumIsStationary) {
  const HarnessConfig cfg = small_config(50);
  const SceneModel model = make_scene(cfg);
  const SceneParams init{ordered_embeddings(5, cfg.scene.d_clip), model.target_tex};
  const OptimizationTrace trace = run_optimization(model, init, cfg.schedule, cfg.optimizer);
  for (const TraceRecord& r : trace.records) {
    EXPECT_EQ(r.r_svo, 0.0);
    EXPECT_EQ(r.r_spd, 0.0);
    EXPECT_EQ(r.total, 0.0);
    EXPECT_GE(r.min_gap, cfg.margin);
  }
  EXPECT_EQ(trace.final_params.tex, init.tex);
  EXPECT_EQ(trace.final_params.embed, init.embed);
}

TEST(RunOptimization, RecordCountAndSchedule) {
  const HarnessConfig cfg = small_config(30);
  const OptimizationTrace trace = run_optimization(cfg);
  ASSERT_EQ(trace.records.size(), 31u);
  for (std::size_t k = 0; k < trace.records.size(); ++k) {
    const TraceRecord& r = trace.records[k];
    EXPECT_EQ(r.iter, static_cast<int>(k));
    EXPECT_EQ(r.lambda_svo, lambda_svo(r.iter, cfg.schedule));
    EXPECT_EQ(r.lambda_spd, lambda_spd(r.iter, cfg.schedule));
    EXPECT_NEAR(r.total, r.lambda_spd * r.r_spd + r.lambda_svo * r.r_svo, 1e-12 * std::max(1.0, r.total));
    EXPECT_NEAR(r.lem_dist * r.lem_dist, r.r_spd, 1e-12 * std::max(1.0, r.r_spd));
  }
}

TEST(RunOptimization, BitIdenticalAcrossRuns) {
  const HarnessConfig cfg = small_config(200);
  const OptimizationTrace a = run_optimization(cfg);
  const OptimizationTrace b = run_optimization(cfg);
  std::ostringstream sa, sb;
  write_trace_csv(sa, a);
  write_trace_csv(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_EQ(a.final_params.embed, b.final_params.embed);
  EXPECT_EQ(a.final_params.tex, b.final_params.tex);
}

TEST(RunOptimization, DivergenceIsReported) {
  HarnessConfig cfg = small_config(50);
  cfg.optimizer.step_size = 1e306;
  try {
    run_optimization(cfg);
    FAIL() << "expected divergence";
  } catch (const DivergedError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Diverged);
    EXPECT_GE(e.iteration(), 1);
  }
}

TEST(RunOptimization, JanusAblations) {
  const HarnessConfig full = HarnessConfig{};
  const OptimizationTrace base = run_optimization(full);
  const TraceRecord& last = base.records.back();
  EXPECT_EQ(last.r_svo, 0.0);
  EXPECT_GE(last.min_gap, full.margin);
  EXPECT_LT(last.lem_dist, base.records.front().lem_dist);

  HarnessConfig no_svo = full;
  no_svo.schedule.svo_initial = no_svo.schedule.svo_final = 0.0;
  const TraceRecord no_svo_last = run_optimization(no_svo).records.back();
  EXPECT_GT(no_svo_last.r_svo, 0.0);
  EXPECT_LT(no_svo_last.min_gap, full.margin);

  HarnessConfig no_spd = full;
  no_spd.schedule.spd_base = no_spd.schedule.spd_peak = 0.0;
  const TraceRecord no_spd_last = run_optimization(no_spd).records.back();
  EXPECT_GT(no_spd_last.lem_dist, last.lem_dist);

  const ConvergenceReport rep = check_convergence(base, 1e-3, true);
  EXPECT_TRUE(rep.spd_converged);
  EXPECT_TRUE(rep.svo_satisfied);
  EXPECT_TRUE(rep.total_decreased);
  EXPECT_TRUE(rep.converged);
}

TEST(RunOptimization, MatchesGoldenTrace) {
  const std::filesystem::path golden = std::filesystem::path(MOC_TEST_DATA_DIR) / "golden_trace_seed42.csv";
  ASSERT_TRUE(std::filesystem::exists(golden)) << golden;
  const std::vector<TraceRecord> expected = read_trace_csv(golden);
  const OptimizationTrace got = run_optimization(HarnessConfig{});
  ASSERT_EQ(got.records.size(), expected.size());
  auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); };
  for (std::size_t k = 0; k < expected.size(); ++k) {
    const TraceRecord& g = got.records[k];
    const TraceRecord& e = expected[k];
    ASSERT_EQ(g.iter, e.iter);
    ASSERT_TRUE(close(g.total, e.total) && close(g.r_svo, e.r_svo) && close(g.r_spd, e.r_spd) &&
                close(g.lambda_svo, e.lambda_svo) && close(g.lambda_spd, e.lambda_spd) &&
                close(g.min_gap, e.min_gap) && close(g.lem_dist, e.lem_dist))
        << "record " << k << " differs from golden";
  }
}

TEST(CheckConvergence, Flags) {
  EXPECT_THROW_KIND(check_convergence(OptimizationTrace{}, 1e-3, true), ErrorKind::InvalidInput);
  OptimizationTrace t;
  t.records.push_back({0, 1.0, 0.2, 0.5, 1, 1, -0.3, 0.7});
  t.records.push_back({1, 2.0, 0.0, 1e-8, 1, 1, 0.1, 1e-4});
  ConvergenceReport r = check_convergence(t, 1e-3, true);
  EXPECT_TRUE(r.spd_converged);
  EXPECT_TRUE(r.svo_satisfied);
  EXPECT_FALSE(r.total_decreased);
  EXPECT_FALSE(r.converged);
  t.records.back().total = 0.5;
  t.records.back().r_svo = 0.01;
  r = check_convergence(t, 1e-3, true);
  EXPECT_FALSE(r.converged);
  r = check_convergence(t, 1e-3, false);
  EXPECT_TRUE(r.converged);
}

TEST(HarnessGradient, MatchesFiniteDifferences) {
  const GradCheckResult r = check_harness_gradient(42, 5);
  EXPECT_EQ(r.instances, 5);
  EXPECT_LT(r.max_rel_err, 1e-5);
  EXPECT_TRUE(r.pass);
}

}  // namespace
}  // namespace moc
