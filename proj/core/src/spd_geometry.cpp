#include "moc/spd_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "moc/error.hpp"

namespace moc {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// exp overflows double just above 709.78.
constexpr double kMaxExpArgument = 700.0;

void require_finite_square(const MatrixXd& m) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw Error(ErrorKind::InvalidInput,
                "expected a non-empty square matrix, got " + std::to_string(m.rows()) + "x" +
                    std::to_string(m.cols()));
  }
  if (!m.allFinite()) {
    throw Error(ErrorKind::InvalidInput, "matrix has non-finite entries");
  }
}

void require_same_dim(Index a, Index b) {
  if (a != b) {
    throw Error(ErrorKind::DimMismatch,
                "dimension mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

void require_eps(double eps) {
  if (!(eps >= 0.0) || !std::isfinite(eps)) {
    throw Error(ErrorKind::InvalidInput, "eps must be a finite non-negative number");
  }
}

void check_positive(const VectorXd& eigvals) {
  const double lo = eigvals(0);
  const double hi = eigvals(eigvals.size() - 1);
  if (!(hi > 0.0) || !(lo > kPdRelativeThreshold * hi)) {
    throw Error(ErrorKind::NotPositiveDefinite,
                "matrix is not positive definite (eigenvalues in [" + std::to_string(lo) + ", " +
                    std::to_string(hi) + "])");
  }
}

// U f(L) U^T
MatrixXd spectral_apply(const SpectralFactorization& f, const VectorXd& values) {
  return f.eigvecs * values.asDiagonal() * f.eigvecs.transpose();
}

}  // namespace

SymMatrix::SymMatrix(const MatrixXd& m) {
  require_finite_square(m);
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::zero(Index dim) { return SymMatrix(MatrixXd::Zero(dim, dim)); }

SymMatrix SymMatrix::identity(Index dim) { return SymMatrix(MatrixXd::Identity(dim, dim)); }

MatrixXd SpectralFactorization::reconstruct() const { return spectral_apply(*this, eigvals); }

SpectralFactorization sym_eig(const SymMatrix& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(m.matrix(), Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::InvalidInput, "symmetric eigensolver did not converge");
  }
  SpectralFactorization f{solver.eigenvalues(), solver.eigenvectors()};
  const Index n = m.dim();
  for (Index j = 0; j < n; ++j) {
    auto col = f.eigvecs.col(j);
    // First component that is not round-off noise decides the sign.
    const double tol = 1e-12 * col.cwiseAbs().maxCoeff();
    for (Index i = 0; i < n; ++i) {
      if (std::abs(col(i)) > tol) {
        if (col(i) < 0.0) col = -col;
        break;
      }
    }
  }
  return f;
}

SpdMatrix::SpdMatrix(const MatrixXd& m) : SpdMatrix(SymMatrix(m)) {}

SpdMatrix::SpdMatrix(const SymMatrix& m) : sym_(m), spectrum_(sym_eig(m)) {
  check_positive(spectrum_.eigvals);
}

SpdMatrix SpdMatrix::identity(Index dim) { return SpdMatrix(SymMatrix::identity(dim)); }

SpdMatrix SpdMatrix::shifted(double eps) const {
  require_eps(eps);
  if (eps == 0.0) return *this;
  MatrixXd m = matrix();
  m.diagonal().array() += eps;
  return SpdMatrix(m);
}

SymMatrix spd_log(const SpdMatrix& c) {
  const auto& f = c.spectrum();
  check_positive(f.eigvals);
  return SymMatrix(spectral_apply(f, f.eigvals.array().log().matrix()));
}

SpdMatrix spd_exp(const SymMatrix& s) {
  const SpectralFactorization f = sym_eig(s);
  if (f.eigvals.maxCoeff() > kMaxExpArgument) {
    throw Error(ErrorKind::NumericOverflow,
                "matrix exponential overflows: eigenvalue " + std::to_string(f.eigvals.maxCoeff()));
  }
  return SpdMatrix(spectral_apply(f, f.eigvals.array().exp().matrix()));
}

double lem_distance_sq(const SpdMatrix& a, const SpdMatrix& b, double eps) {
  require_same_dim(a.dim(), b.dim());
  require_eps(eps);
  const MatrixXd diff = spd_log(a.shifted(eps)).matrix() - spd_log(b.shifted(eps)).matrix();
  return diff.squaredNorm();
}

MatrixXd log_divided_differences(const VectorXd& eigvals) {
  const Index n = eigvals.size();
  MatrixXd g(n, n);
  for (Index i = 0; i < n; ++i) {
    const double li = eigvals(i);
    g(i, i) = 1.0 / li;
    for (Index j = i + 1; j < n; ++j) {
      const double lj = eigvals(j);
      double v;
      if (std::abs(li - lj) < kConfluentRelativeGap * std::max(li, lj)) {
        v = 1.0 / li;
      } else {
        v = (std::log(li) - std::log(lj)) / (li - lj);
      }
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

SymMatrix logm_frechet_adjoint(const SpdMatrix& c, const SymMatrix& w) {
  require_same_dim(c.dim(), w.dim());
  const auto& f = c.spectrum();
  check_positive(f.eigvals);
  const MatrixXd& u = f.eigvecs;
  const MatrixXd inner = (u.transpose() * w.matrix() * u).cwiseProduct(log_divided_differences(f.eigvals));
  return SymMatrix(u * inner * u.transpose());
}

SymMatrix grad_r_spd(const SpdMatrix& c_curr, const SpdMatrix& c_tgt, double eps) {
  require_same_dim(c_curr.dim(), c_tgt.dim());
  require_eps(eps);
  const SpdMatrix curr = c_curr.shifted(eps);
  const SymMatrix residual(spd_log(curr).matrix() - spd_log(c_tgt.shifted(eps)).matrix());
  return SymMatrix(2.0 * logm_frechet_adjoint(curr, residual).matrix());
}

}  // namespace moc
