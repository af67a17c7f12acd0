#include "moc/schedule.hpp"

#include <cmath>
#include <string>

#include "moc/error.hpp"

namespace moc {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorKind::ConfigError, std::string("invalid schedule: ") + what);
}

void require_step(int t, const ScheduleConfig& cfg) {
  if (t < 0 || t > cfg.total_steps) {
    throw Error(ErrorKind::InvalidStep, "step " + std::to_string(t) + " outside [0, " +
                                            std::to_string(cfg.total_steps) + "]");
  }
}

// Linear from `from` at `start` to `to` at `end`, holding `from` before start.
double ramp(int t, int start, int end, double from, double to) {
  if (t < start) return from;
  if (end == start) return to;
  const double frac = static_cast<double>(t - start) / static_cast<double>(end - start);
  return from + (to - from) * frac;
}

bool nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace

ScheduleConfig ScheduleConfig::defaults(int total_steps) {
  ScheduleConfig cfg;
  cfg.total_steps = total_steps;
  cfg.warmup_steps = total_steps / 10;
  cfg.spd_ramp_start = total_steps / 2;
  return cfg;
}

void ScheduleConfig::validate() const {
  require(total_steps > 0, "total_steps must be positive");
  require(warmup_steps >= 0 && warmup_steps <= total_steps, "warmup_steps must lie in [0, total_steps]");
  require(spd_ramp_start >= 0 && spd_ramp_start <= total_steps,
          "spd_ramp_start must lie in [0, total_steps]");
  require(nonneg(svo_initial), "svo_initial must be non-negative");
  require(nonneg(svo_final) && svo_final <= svo_initial, "svo_final must lie in [0, svo_initial]");
  require(nonneg(spd_base), "spd_base must be non-negative");
  require(nonneg(spd_peak) && spd_peak >= spd_base, "spd_peak must be >= spd_base");
}

double lambda_svo(int t, const ScheduleConfig& cfg) {
  require_step(t, cfg);
  return ramp(t, cfg.warmup_steps, cfg.total_steps, cfg.svo_initial, cfg.svo_final);
}

double lambda_spd(int t, const ScheduleConfig& cfg) {
  require_step(t, cfg);
  return ramp(t, cfg.spd_ramp_start, cfg.total_steps, cfg.spd_base, cfg.spd_peak);
}

LossBreakdown total_loss(double base, double r_spd, double r_svo, int t, const ScheduleConfig& cfg) {
  LossBreakdown b;
  b.base = base;
  b.r_spd = r_spd;
  b.r_svo = r_svo;
  b.lambda_svo = lambda_svo(t, cfg);
  b.lambda_spd = lambda_spd(t, cfg);
  b.total = base + b.lambda_spd * r_spd + b.lambda_svo * r_svo;
  return b;
}

}  // namespace moc
