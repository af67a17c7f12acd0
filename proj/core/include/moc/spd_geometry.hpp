#pragma once

// Spectral calculus on symmetric and symmetric positive-definite matrices:
// matrix log/exp, the squared Log-Euclidean distance and its analytic
// gradient through the Frechet derivative of the matrix logarithm.
//
// Eigen decompositions use Eigen's SelfAdjointEigenSolver (Householder
// tridiagonalization followed by implicit symmetric QR), in double precision.

#include <Eigen/Dense>

namespace moc {

/// Dense real symmetric matrix. The constructor averages (M + M^T) / 2, so the
/// stored entries are exactly symmetric.
class SymMatrix {
 public:
  explicit SymMatrix(const Eigen::MatrixXd& m);

  static SymMatrix zero(Eigen::Index dim);
  static SymMatrix identity(Eigen::Index dim);

  Eigen::Index dim() const noexcept { return m_.rows(); }
  const Eigen::MatrixXd& matrix() const noexcept { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

 private:
  Eigen::MatrixXd m_;
};

/// Eigenvalues ascending, eigenvectors as columns. Each eigenvector is signed
/// so that its first non-negligible component is positive.
struct SpectralFactorization {
  Eigen::VectorXd eigvals;
  Eigen::MatrixXd eigvecs;

  Eigen::MatrixXd reconstruct() const;
};

SpectralFactorization sym_eig(const SymMatrix& m);

/// Symmetric positive-definite matrix. Construction symmetrizes, factors, and
/// rejects any matrix whose smallest eigenvalue is not above 1e-14 times the
/// largest. The factorization is kept for reuse by log/gradient routines.
class SpdMatrix {
 public:
  explicit SpdMatrix(const Eigen::MatrixXd& m);
  explicit SpdMatrix(const SymMatrix& m);

  static SpdMatrix identity(Eigen::Index dim);

  Eigen::Index dim() const noexcept { return sym_.dim(); }
  const Eigen::MatrixXd& matrix() const noexcept { return sym_.matrix(); }
  const SymMatrix& sym() const noexcept { return sym_; }
  const SpectralFactorization& spectrum() const noexcept { return spectrum_; }
  double min_eigenvalue() const { return spectrum_.eigvals(0); }

  /// this + eps * I, refactored. eps == 0 returns a copy.
  SpdMatrix shifted(double eps) const;

 private:
  SymMatrix sym_;
  SpectralFactorization spectrum_;
};

/// Relative threshold of the positive-definiteness check.
inline constexpr double kPdRelativeThreshold = 1e-14;

/// Relative eigenvalue gap below which divided differences of log switch to
/// the confluent limit 1 / lambda.
inline constexpr double kConfluentRelativeGap = 1e-12;

SymMatrix spd_log(const SpdMatrix& c);
SpdMatrix spd_exp(const SymMatrix& s);

/// || log(a + eps I) - log(b + eps I) ||_F^2
double lem_distance_sq(const SpdMatrix& a, const SpdMatrix& b, double eps);

/// First divided differences of log on the given (positive) eigenvalues.
Eigen::MatrixXd log_divided_differences(const Eigen::VectorXd& eigvals);

/// Adjoint of the Frechet derivative of log at c applied to w. The operator
/// is self-adjoint, so this is also the directional derivative Dlog(c)[w].
SymMatrix logm_frechet_adjoint(const SpdMatrix& c, const SymMatrix& w);

/// Gradient of lem_distance_sq(c_curr, c_tgt, eps) with respect to the entry
/// grid of c_curr, where the loss sees c_curr through its symmetric part.
SymMatrix grad_r_spd(const SpdMatrix& c_curr, const SpdMatrix& c_tgt, double eps);

}  // namespace moc
