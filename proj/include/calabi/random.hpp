#ifndef CALABI_RANDOM_HPP
#define CALABI_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include <Eigen/Dense>

namespace calabi {

/// Seeded sampler with a fully specified output sequence.
///
/// std::mt19937_64 is pinned by the standard but the std distributions are
/// not, so uniforms and normals are derived here directly from the raw
/// engine output; reports stay byte-identical across standard libraries.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  Eigen::VectorXd normal_vector(Eigen::Index dim) {
    Eigen::VectorXd v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v(i) = normal();
    return v;
  }

  Eigen::VectorXd unit_vector(Eigen::Index dim) {
    Eigen::VectorXd v;
    do {
      v = normal_vector(dim);
    } while (v.norm() == 0.0);
    return v / v.norm();
  }

  /// Uniform in the closed ball of the given radius.
  Eigen::VectorXd in_ball(Eigen::Index dim, double radius) {
    const Eigen::VectorXd dir = unit_vector(dim);
    return radius * std::pow(uniform(), 1.0 / static_cast<double>(dim)) * dir;
  }

  /// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with the
  /// sign of R's diagonal folded into Q).
  Eigen::MatrixXd orthogonal(Eigen::Index dim) {
    Eigen::MatrixXd A(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j) A.col(j) = normal_vector(dim);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
    Eigen::MatrixXd Q = qr.householderQ();
    const Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < dim; ++j) {
      if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
    }
    return Q;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace calabi

#endif  // CALABI_RANDOM_HPP
