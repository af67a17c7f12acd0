#pragma once

// Semantic view-order constraint: a hinge rank loss that asks the cosine
// similarity to the frontal anchor to decrease with azimuth by at least a
// margin between adjacent views.

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace moc {

inline constexpr double kDefaultMargin = 0.05;

struct NoiseScheduleCoeffs {
  double alpha_t = 1.0;
  double sigma_t = 0.0;
  int t = 0;
};

/// z0_hat = (z_t - sigma_t * eps_pred) / alpha_t, elementwise.
std::vector<double> estimate_clean_latent(std::span<const double> z_t,
                                          std::span<const double> eps_pred,
                                          const NoiseScheduleCoeffs& coeffs);

/// Reference embedding plus K views, stored both raw and L2-normalized.
/// Row 0 of the raw matrix is the 0-degree anchor; rows 1..K follow the
/// strictly increasing azimuths (all in (0, 360)).
class ViewEmbeddingSequence {
 public:
  ViewEmbeddingSequence(Eigen::MatrixXd raw_rows, std::vector<double> azimuths);

  int size() const noexcept { return static_cast<int>(azimuths_.size()); }
  Eigen::Index embedding_dim() const noexcept { return raw_.cols(); }

  const Eigen::MatrixXd& raw() const noexcept { return raw_; }
  const Eigen::MatrixXd& unit() const noexcept { return unit_; }
  const Eigen::VectorXd& norms() const noexcept { return norms_; }
  const std::vector<double>& azimuths() const noexcept { return azimuths_; }

  auto ref() const { return unit_.row(0); }
  auto view(int i) const { return unit_.row(i + 1); }

 private:
  Eigen::MatrixXd raw_;
  Eigen::MatrixXd unit_;
  Eigen::VectorXd norms_;
  std::vector<double> azimuths_;
};

/// Cosine similarity of every view with the reference.
Eigen::VectorXd similarities(const ViewEmbeddingSequence& vs);

struct SvoResult {
  double loss = 0.0;
  std::vector<double> per_term;
  std::vector<double> sims;
};

/// sum_i max(0, sims[i+1] - sims[i] + delta). A term with argument exactly 0
/// counts as inactive.
SvoResult svo_loss(std::span<const double> sims, double delta);
inline SvoResult svo_loss(const Eigen::VectorXd& sims, double delta) {
  return svo_loss(std::span<const double>(sims.data(), static_cast<std::size_t>(sims.size())), delta);
}

/// Smallest adjacent drop sims[i] - sims[i+1]; +inf when K < 2.
double min_adjacent_gap(std::span<const double> sims);
inline double min_adjacent_gap(const Eigen::VectorXd& sims) {
  return min_adjacent_gap(std::span<const double>(sims.data(), static_cast<std::size_t>(sims.size())));
}

/// Subgradient of svo_loss(similarities(vs), delta) with respect to the raw
/// (pre-normalization) embeddings, laid out like vs.raw().
Eigen::MatrixXd svo_grad(const ViewEmbeddingSequence& vs, double delta);

}  // namespace moc
