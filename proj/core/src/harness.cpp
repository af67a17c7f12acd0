#include "moc/harness.hpp"

#include <cmath>
#include <string>

#include "moc/error.hpp"
#include "moc/random.hpp"
#include "moc/spd_geometry.hpp"

namespace moc {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Stream ids for CounterRng::split.
enum Stream : std::uint64_t {
  kOperatorStream = 1,
  kTargetStream = 2,
  kTextureInitStream = 3,
  kEmbedInitStream = 4,
};

constexpr double kJanusNoise = 0.01;

void config_error(const std::string& what) { throw Error(ErrorKind::ConfigError, what); }

Index feature_len(const SceneModel& m) { return Index{kLatentChannels} * m.height * m.width; }

FeatureMap render_map(const MatrixXd& op, const VectorXd& tex, int height, int width) {
  const VectorXd flat = op * tex;
  // Row-major reshape into the (4H) x W stacked layout.
  MatrixXd stacked = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      flat.data(), Index{kLatentChannels} * height, width);
  return FeatureMap(std::move(stacked));
}

FeatureMapStack render_stack(const VectorXd& tex, const SceneModel& m) {
  std::vector<FeatureMap> maps;
  maps.reserve(m.view_maps.size());
  for (const MatrixXd& op : m.view_maps) maps.push_back(render_map(op, tex, m.height, m.width));
  return FeatureMapStack(std::move(maps), m.azimuths);
}

ViewEmbeddingSequence make_embeddings(const MatrixXd& embed, const std::vector<double>& azimuths) {
  return ViewEmbeddingSequence(embed, std::vector<double>(azimuths.begin() + 1, azimuths.end()));
}

bool all_finite(const SceneParams& p) { return p.embed.allFinite() && p.tex.allFinite(); }

}  // namespace

void HarnessConfig::validate() const {
  const SceneConfig& s = scene;
  if (s.views < 3) config_error("scene.views must be at least 3 (reference plus two ordered views)");
  if (static_cast<int>(s.azimuths.size()) != s.views) {
    config_error("scene.azimuths must list one azimuth per view");
  }
  if (s.azimuths.front() != 0.0) config_error("scene.azimuths must start with the 0-degree reference");
  for (std::size_t i = 1; i < s.azimuths.size(); ++i) {
    if (!(s.azimuths[i] > s.azimuths[i - 1]) || !(s.azimuths[i] < 360.0)) {
      config_error("scene.azimuths must be strictly increasing within [0, 360)");
    }
  }
  if (s.d_clip < 1) config_error("scene.d_clip must be positive");
  if (s.height < 1 || s.width < 1) config_error("scene.height and scene.width must be positive");
  if (s.patch < 1 || s.height % s.patch != 0 || s.width % s.patch != 0) {
    config_error("scene.patch must divide scene.height and scene.width");
  }
  if (s.views * (s.height / s.patch) * (s.width / s.patch) < 2) {
    config_error("scene must produce at least 2 patches");
  }
  if (s.tex_dim < 1) config_error("scene.tex_dim must be positive");
  if (!(optimizer.step_size > 0.0) || !std::isfinite(optimizer.step_size)) {
    config_error("optimizer.step_size must be positive");
  }
  if (optimizer.iterations < 0 || optimizer.iterations > schedule.total_steps) {
    config_error("optimizer.iterations must lie in [0, schedule.total_steps]");
  }
  schedule.validate();
  if (!(margin >= 0.0) || !std::isfinite(margin)) config_error("margin must be non-negative");
  if (!(eps > 0.0) || !std::isfinite(eps)) config_error("eps must be positive");
}

SceneModel make_scene(const HarnessConfig& cfg) {
  cfg.validate();
  const SceneConfig& s = cfg.scene;
  const CounterRng root(cfg.seed);

  CounterRng ops = root.split(kOperatorStream);
  const Index rows = Index{kLatentChannels} * s.height * s.width;
  const double scale = 1.0 / std::sqrt(static_cast<double>(s.tex_dim));
  std::vector<MatrixXd> view_maps;
  view_maps.reserve(static_cast<std::size_t>(s.views));
  for (int v = 0; v < s.views; ++v) view_maps.push_back(scale * random_normal(ops, rows, s.tex_dim));

  CounterRng tgt = root.split(kTargetStream);
  VectorXd target_tex = random_normal(tgt, s.tex_dim, 1);

  SceneModel partial{
      .view_maps = std::move(view_maps),
      .azimuths = s.azimuths,
      .height = s.height,
      .width = s.width,
      .patch = s.patch,
      .margin = cfg.margin,
      .eps = cfg.eps,
      .weights = LuminanceWeights::equal(),
      .target_tex = target_tex,
      // Placeholder, replaced below once the operators exist.
      .target = ExtendedDescriptor{SpdMatrix::identity(Index{s.patch} * s.patch + 1), cfg.eps},
  };
  partial.target = build_descriptor(render_stack(target_tex, partial), partial.weights, s.patch, cfg.eps);
  return partial;
}

SceneParams initial_params(const SceneModel& model, const HarnessConfig& cfg) {
  const CounterRng root(cfg.seed);
  CounterRng tex_rng = root.split(kTextureInitStream);
  CounterRng emb_rng = root.split(kEmbedInitStream);
  const Index tex_dim = model.view_maps.front().cols();
  // Entries N(0, 1/d_clip) give rows of roughly unit norm.
  const double emb_scale = 1.0 / std::sqrt(static_cast<double>(cfg.scene.d_clip));
  SceneParams p{emb_scale * random_normal(emb_rng, static_cast<Index>(model.azimuths.size()), cfg.scene.d_clip),
                random_normal(tex_rng, tex_dim, 1)};
  if (cfg.scene.janus_init) {
    const Index last = p.embed.rows() - 1;
    p.embed.row(last) = p.embed.row(0) + kJanusNoise * emb_scale * random_normal(emb_rng, 1, p.embed.cols());
  }
  return p;
}

RenderedViews render_views(const SceneParams& p, const SceneModel& m) {
  if (m.view_maps.empty() || p.tex.size() != m.view_maps.front().cols()) {
    throw Error(ErrorKind::DimMismatch, "texture parameters do not match the view operators");
  }
  if (p.embed.rows() != static_cast<Index>(m.azimuths.size())) {
    throw Error(ErrorKind::DimMismatch, "one embedding row per view is required");
  }
  for (const MatrixXd& op : m.view_maps) {
    if (op.rows() != feature_len(m) || op.cols() != p.tex.size()) {
      throw Error(ErrorKind::DimMismatch, "view operator shape disagrees with (H, W, P)");
    }
  }
  return {render_stack(p.tex, m), make_embeddings(p.embed, m.azimuths)};
}

Evaluation evaluate(const SceneModel& model, const SceneParams& p, int t,
                    const ScheduleConfig& schedule, bool with_gradient) {
  const RenderedViews views = render_views(p, model);

  std::vector<MatrixXd> grays;
  grays.reserve(views.stack.size());
  for (const FeatureMap& f : views.stack.views()) grays.push_back(luminance_compress(f, model.weights));
  const SampleMatrix x = collect_patches(grays, model.patch);
  const MomentPair moments = mean_cov(x);
  const ExtendedDescriptor current = extended_spd(moments, model.eps);

  const double r_spd = lem_distance_sq(current.c, model.target.c, model.eps);
  const VectorXd sims = similarities(views.embeddings);
  const SvoResult svo = svo_loss(sims, model.margin);

  Evaluation ev;
  ev.loss = total_loss(0.0, r_spd, svo.loss, t, schedule);
  ev.min_gap = min_adjacent_gap(sims);
  ev.lem_dist = std::sqrt(r_spd);
  if (!with_gradient) return ev;

  ev.grad.embed = MatrixXd::Zero(p.embed.rows(), p.embed.cols());
  ev.grad.tex = VectorXd::Zero(p.tex.size());
  if (ev.loss.lambda_svo != 0.0) {
    ev.grad.embed = ev.loss.lambda_svo * svo_grad(views.embeddings, model.margin);
  }
  if (ev.loss.lambda_spd != 0.0) {
    const SymMatrix grad_c = grad_r_spd(current.c, model.target.c, model.eps);
    const MatrixXd grad_x = extended_spd_pullback(x, moments, grad_c);
    const std::vector<MatrixXd> grad_grays =
        patches_pullback(grad_x, grays.size(), model.height, model.width, model.patch);
    for (std::size_t v = 0; v < grad_grays.size(); ++v) {
      const FeatureMap gf = luminance_pullback(grad_grays[v], model.weights);
      const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = gf.stacked();
      const Eigen::Map<const VectorXd> flat(rm.data(), rm.size());
      ev.grad.tex.noalias() += model.view_maps[v].transpose() * flat;
    }
    ev.grad.tex *= ev.loss.lambda_spd;
  }
  return ev;
}

OptimizationTrace run_optimization(const SceneModel& model, SceneParams init,
                                   const ScheduleConfig& schedule, const OptimizerConfig& opt) {
  schedule.validate();
  if (opt.iterations < 0 || opt.iterations > schedule.total_steps) {
    throw Error(ErrorKind::ConfigError, "iterations must lie in [0, total_steps]");
  }
  if (!(opt.step_size > 0.0)) throw Error(ErrorKind::ConfigError, "step_size must be positive");
  if (!all_finite(init)) throw Error(ErrorKind::InvalidInput, "initial parameters must be finite");

  OptimizationTrace trace;
  trace.records.reserve(static_cast<std::size_t>(opt.iterations) + 1);
  SceneParams p = std::move(init);

  auto record = [&](int k, const Evaluation& ev) {
    if (!std::isfinite(ev.loss.total)) {
      throw DivergedError(k, "loss became non-finite at iteration " + std::to_string(k));
    }
    trace.records.push_back({k, ev.loss.total, ev.loss.r_svo, ev.loss.r_spd, ev.loss.lambda_svo,
                             ev.loss.lambda_spd, ev.min_gap, ev.lem_dist});
  };

  Evaluation ev = evaluate(model, p, 0, schedule);
  record(0, ev);
  for (int k = 1; k <= opt.iterations; ++k) {
    p.embed -= opt.step_size * ev.grad.embed;
    p.tex -= opt.step_size * ev.grad.tex;
    if (!all_finite(p)) {
      throw DivergedError(k, "parameters became non-finite at iteration " + std::to_string(k));
    }
    // Shapes were validated by the step-0 evaluation, so any failure from
    // here on is numeric (overflowing moments, lost definiteness, collapsed
    // embedding rows).
    try {
      ev = evaluate(model, p, k, schedule);
    } catch (const Error& e) {
      throw DivergedError(k, std::string("iteration ") + std::to_string(k) + ": " + e.what());
    }
    record(k, ev);
  }
  trace.final_params = std::move(p);
  return trace;
}

OptimizationTrace run_optimization(const HarnessConfig& cfg) {
  const SceneModel model = make_scene(cfg);
  return run_optimization(model, initial_params(model, cfg), cfg.schedule, cfg.optimizer);
}

ConvergenceReport check_convergence(const OptimizationTrace& trace, double tol_spd,
                                    bool require_svo_zero) {
  if (trace.records.empty()) throw Error(ErrorKind::InvalidInput, "trace has no records");
  const TraceRecord& first = trace.records.front();
  const TraceRecord& last = trace.records.back();
  ConvergenceReport r;
  r.final_lem_dist = last.lem_dist;
  r.final_r_svo = last.r_svo;
  r.initial_total = first.total;
  r.final_total = last.total;
  r.spd_converged = last.lem_dist <= tol_spd;
  r.svo_satisfied = last.r_svo == 0.0;
  r.total_decreased = last.total <= first.total;
  r.converged = r.spd_converged && r.total_decreased && (!require_svo_zero || r.svo_satisfied);
  return r;
}

}  // namespace moc
