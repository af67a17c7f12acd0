#pragma once

#include <utility>

namespace moc {

/// Piecewise-linear constraint weights over optimization steps [0, T].
///
/// lambda_svo holds svo_initial until warmup_steps, then anneals linearly to
/// svo_final at total_steps. lambda_spd holds spd_base until spd_ramp_start,
/// then rises linearly to spd_peak at total_steps.
struct ScheduleConfig {
  int total_steps = 2000;
  int warmup_steps = 200;
  double svo_initial = 1.0;
  double svo_final = 0.1;
  double spd_base = 1.0;
  double spd_peak = 2.0;
  int spd_ramp_start = 1000;

  /// Defaults scaled to T: warmup at 0.1 T, spd ramp from 0.5 T.
  static ScheduleConfig defaults(int total_steps);

  /// Throws ConfigError naming the first violated field constraint.
  void validate() const;
};

double lambda_svo(int t, const ScheduleConfig& cfg);
double lambda_spd(int t, const ScheduleConfig& cfg);

struct LossBreakdown {
  double base = 0.0;
  double r_spd = 0.0;
  double r_svo = 0.0;
  double total = 0.0;
  double lambda_svo = 0.0;
  double lambda_spd = 0.0;
};

/// total = base + lambda_spd(t) r_spd + lambda_svo(t) r_svo
LossBreakdown total_loss(double base, double r_spd, double r_svo, int t, const ScheduleConfig& cfg);

}  // namespace moc
