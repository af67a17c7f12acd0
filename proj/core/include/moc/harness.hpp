#pragma once

// Desk-scale optimization harness. A toy multi-view "scene" is a set of free
// embedding rows (one per view, row 0 at azimuth 0) plus a texture vector
// that frozen random linear operators turn into 4xHxW feature maps. The
// objective is the scheduled sum of the view-order hinge loss on the
// embeddings and the Log-Euclidean distance between the rendered stack's
// extended descriptor and a target descriptor; gradients are analytic.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "moc/feature_stats.hpp"
#include "moc/schedule.hpp"
#include "moc/view_order.hpp"

namespace moc {

struct SceneConfig {
  int views = 5;
  std::vector<double> azimuths{0.0, 45.0, 90.0, 135.0, 180.0};
  int d_clip = 16;
  int height = 8;
  int width = 8;
  int patch = kDefaultPatch;
  int tex_dim = 32;
  /// Start the last view's embedding next to the reference (front-facing
  /// content on the back view).
  bool janus_init = true;
};

struct OptimizerConfig {
  double step_size = 1e-2;
  int iterations = 2000;
};

struct HarnessConfig {
  SceneConfig scene;
  OptimizerConfig optimizer;
  ScheduleConfig schedule;
  std::uint64_t seed = 42;
  double margin = kDefaultMargin;
  double eps = kDefaultEps;

  /// Throws ConfigError on the first inconsistent field.
  void validate() const;
};

struct SceneParams {
  Eigen::MatrixXd embed;  // (K+1) x d_clip, raw
  Eigen::VectorXd tex;    // tex_dim
};

struct SceneModel {
  std::vector<Eigen::MatrixXd> view_maps;  // per view: (4 H W) x tex_dim
  std::vector<double> azimuths;            // all views, starting at 0
  int height = 0;
  int width = 0;
  int patch = 0;
  double margin = kDefaultMargin;
  double eps = kDefaultEps;
  LuminanceWeights weights = LuminanceWeights::equal();
  Eigen::VectorXd target_tex;
  ExtendedDescriptor target;
};

/// Frozen operators and target descriptor, drawn from `cfg.seed`.
SceneModel make_scene(const HarnessConfig& cfg);

/// Starting point drawn from `cfg.seed` on streams disjoint from make_scene.
SceneParams initial_params(const SceneModel& model, const HarnessConfig& cfg);

struct RenderedViews {
  FeatureMapStack stack;
  ViewEmbeddingSequence embeddings;
};

RenderedViews render_views(const SceneParams& p, const SceneModel& m);

struct Evaluation {
  LossBreakdown loss;
  double min_gap = 0.0;
  double lem_dist = 0.0;
  SceneParams grad;  // empty unless requested
};

Evaluation evaluate(const SceneModel& model, const SceneParams& p, int t,
                    const ScheduleConfig& schedule, bool with_gradient = true);

struct TraceRecord {
  int iter = 0;
  double total = 0.0;
  double r_svo = 0.0;
  double r_spd = 0.0;
  double lambda_svo = 0.0;
  double lambda_spd = 0.0;
  double min_gap = 0.0;
  double lem_dist = 0.0;
};

struct OptimizationTrace {
  std::vector<TraceRecord> records;  // iterations + 1 entries, initial state first
  SceneParams final_params;
};

/// Plain gradient descent with a fixed step; record k is the state after k
/// steps, scored with the schedule weights at step k.
OptimizationTrace run_optimization(const SceneModel& model, SceneParams init,
                                   const ScheduleConfig& schedule, const OptimizerConfig& opt);

OptimizationTrace run_optimization(const HarnessConfig& cfg);

struct ConvergenceReport {
  bool spd_converged = false;      // final lem_dist <= tol_spd
  bool svo_satisfied = false;      // final r_svo == 0
  bool total_decreased = false;    // final total <= initial total
  bool converged = false;          // all of the above that were required
  double final_lem_dist = 0.0;
  double final_r_svo = 0.0;
  double initial_total = 0.0;
  double final_total = 0.0;
};

ConvergenceReport check_convergence(const OptimizationTrace& trace, double tol_spd,
                                    bool require_svo_zero);

}  // namespace moc
