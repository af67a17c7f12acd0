#include "moc/random.hpp"

#include <cmath>
#include <numbers>

namespace moc {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t CounterRng::next_u64() noexcept {
  ++counter_;
  return mix64(seed_ + counter_ * kGolden);
}

double CounterRng::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::normal() noexcept {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

CounterRng CounterRng::split(std::uint64_t stream) const noexcept {
  return CounterRng(mix64(seed_ ^ mix64(stream + kGolden)));
}

Eigen::MatrixXd random_normal(CounterRng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  // Row-major fill so the draw order matches how the values are read.
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

Eigen::MatrixXd random_orthogonal(CounterRng& rng, Eigen::Index dim) {
  const Eigen::MatrixXd a = random_normal(rng, dim, dim);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(dim, dim);
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < dim; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

Eigen::MatrixXd random_spd(CounterRng& rng, Eigen::Index dim, double condition) {
  const Eigen::MatrixXd q = random_orthogonal(rng, dim);
  const double span = std::log(condition);
  const double offset = rng.uniform(-1.0, 1.0);
  Eigen::VectorXd l(dim);
  for (Eigen::Index i = 0; i < dim; ++i) l(i) = std::exp(offset + span * rng.uniform());
  Eigen::MatrixXd m = q * l.asDiagonal() * q.transpose();
  return 0.5 * (m + m.transpose());
}

}  // namespace moc
