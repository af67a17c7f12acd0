#include "moc/view_order.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "moc/error.hpp"

namespace moc {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

void require_margin(double delta) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw Error(ErrorKind::InvalidMargin, "margin must be finite and non-negative");
  }
}

}  // namespace

std::vector<double> estimate_clean_latent(std::span<const double> z_t,
                                          std::span<const double> eps_pred,
                                          const NoiseScheduleCoeffs& coeffs) {
  if (z_t.size() != eps_pred.size()) {
    throw Error(ErrorKind::DimMismatch, "latent and noise prediction differ in size");
  }
  if (!(coeffs.alpha_t > 0.0) || !std::isfinite(coeffs.alpha_t) || !(coeffs.sigma_t >= 0.0) ||
      !std::isfinite(coeffs.sigma_t)) {
    throw Error(ErrorKind::InvalidCoefficient,
                "need alpha_t > 0 and sigma_t >= 0 (got alpha_t=" + std::to_string(coeffs.alpha_t) +
                    ")");
  }
  std::vector<double> out(z_t.size());
  for (std::size_t i = 0; i < z_t.size(); ++i) {
    out[i] = (z_t[i] - coeffs.sigma_t * eps_pred[i]) / coeffs.alpha_t;
  }
  return out;
}

ViewEmbeddingSequence::ViewEmbeddingSequence(MatrixXd raw_rows, std::vector<double> azimuths)
    : raw_(std::move(raw_rows)), azimuths_(std::move(azimuths)) {
  if (raw_.rows() < 2 || raw_.cols() < 1) {
    throw Error(ErrorKind::InvalidInput, "need a reference and at least one view");
  }
  if (static_cast<std::size_t>(raw_.rows() - 1) != azimuths_.size()) {
    throw Error(ErrorKind::DimMismatch, "one azimuth per non-reference view is required");
  }
  if (!raw_.allFinite()) throw Error(ErrorKind::InvalidInput, "embeddings must be finite");
  for (std::size_t i = 0; i < azimuths_.size(); ++i) {
    const double a = azimuths_[i];
    if (!(a > 0.0 && a < 360.0)) {
      throw Error(ErrorKind::InvalidInput,
                  "view azimuth " + std::to_string(a) + " outside (0, 360); 0 is the reference");
    }
    if (i > 0 && !(a > azimuths_[i - 1])) {
      throw Error(ErrorKind::InvalidInput, "view azimuths must be strictly increasing");
    }
  }
  norms_ = raw_.rowwise().norm();
  for (Index r = 0; r < raw_.rows(); ++r) {
    if (!(norms_(r) > 0.0)) {
      throw Error(ErrorKind::DegenerateEmbedding, "embedding row " + std::to_string(r) + " has zero norm");
    }
  }
  unit_ = norms_.cwiseInverse().asDiagonal() * raw_;
}

VectorXd similarities(const ViewEmbeddingSequence& vs) {
  const MatrixXd& u = vs.unit();
  return u.bottomRows(u.rows() - 1) * u.row(0).transpose();
}

SvoResult svo_loss(std::span<const double> sims, double delta) {
  require_margin(delta);
  if (sims.empty()) throw Error(ErrorKind::InvalidInput, "need at least one similarity");
  SvoResult r;
  r.sims.assign(sims.begin(), sims.end());
  r.per_term.reserve(sims.size() - 1);
  for (std::size_t i = 0; i + 1 < sims.size(); ++i) {
    const double term = std::max(0.0, sims[i + 1] - sims[i] + delta);
    r.per_term.push_back(term);
    r.loss += term;
  }
  return r;
}

double min_adjacent_gap(std::span<const double> sims) {
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < sims.size(); ++i) gap = std::min(gap, sims[i] - sims[i + 1]);
  return gap;
}

MatrixXd svo_grad(const ViewEmbeddingSequence& vs, double delta) {
  require_margin(delta);
  const VectorXd s = similarities(vs);
  const Index k = s.size();

  VectorXd ds = VectorXd::Zero(k);
  for (Index i = 0; i + 1 < k; ++i) {
    if (s(i + 1) - s(i) + delta > 0.0) {
      ds(i + 1) += 1.0;
      ds(i) -= 1.0;
    }
  }

  const MatrixXd& u = vs.unit();
  const auto r = u.row(0);
  MatrixXd grad = MatrixXd::Zero(u.rows(), u.cols());
  for (Index i = 0; i < k; ++i) {
    if (ds(i) == 0.0) continue;
    const auto v = u.row(i + 1);
    // d<v, r>/d raw_v = (r - s v) / |raw_v|, and symmetrically for raw_ref.
    grad.row(i + 1) += ds(i) / vs.norms()(i + 1) * (r - s(i) * v);
    grad.row(0) += ds(i) / vs.norms()(0) * (v - s(i) * r);
  }
  return grad;
}

}  // namespace moc
