#pragma once

// Central finite-difference checks of the analytic gradients. The numeric
// side only ever calls the loss functions, never their gradients.

#include <cstdint>
#include <functional>
#include <string>

#include <Eigen/Dense>

namespace moc {

inline constexpr double kFdStep = 1e-6;
inline constexpr double kGradcheckTolerance = 1e-5;

/// Instances whose hinge arguments lie within this distance of a kink are
/// redrawn: a central difference with step kFdStep moves similarities by
/// O(kFdStep), so a narrower band would let the stencil straddle the kink.
inline constexpr double kKinkExclusion = 1e-4;

/// Central differences of f with respect to every entry of x.
Eigen::MatrixXd central_difference(const std::function<double(const Eigen::MatrixXd&)>& f,
                                   const Eigen::MatrixXd& x, double h = kFdStep);

/// ||a - b||_F / max(||a||_F, ||b||_F); 0 when both vanish.
double relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

struct GradCheckResult {
  std::string target;
  int instances = 0;
  double max_rel_err = 0.0;
  double max_abs_grad = 0.0;
  double tolerance = kGradcheckTolerance;
  bool pass = false;
};

/// grad_r_spd on random SPD pairs (dim 2..6, condition <= 1e2, eps in {0, 1e-6}).
GradCheckResult check_spd_gradient(std::uint64_t seed, int instances = 50,
                                   double tolerance = kGradcheckTolerance);

/// svo_grad on random embedding sequences away from hinge kinks.
GradCheckResult check_svo_gradient(std::uint64_t seed, int instances = 50,
                                   double tolerance = kGradcheckTolerance);

/// svo_grad on a configuration that already satisfies the ordering with
/// slack; analytic and numeric gradients are both zero.
GradCheckResult check_svo_satisfied(std::uint64_t seed, double tolerance = kGradcheckTolerance);

/// Total-loss gradient of the default harness scene at random parameter
/// points and random schedule steps.
GradCheckResult check_harness_gradient(std::uint64_t seed, int points = 5,
                                       double tolerance = kGradcheckTolerance);

}  // namespace moc
