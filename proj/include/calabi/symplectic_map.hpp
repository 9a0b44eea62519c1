#ifndef CALABI_SYMPLECTIC_MAP_HPP
#define CALABI_SYMPLECTIC_MAP_HPP

// Phi(x, y) = (grad f(x), y): the global Darboux chart of the tube onto
// (R^2n, omega_0), with omega_0 = sum dp_j ^ dy_j written as [[0, I], [-I, 0]].

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "calabi/error.hpp"
#include "calabi/finite_difference.hpp"
#include "calabi/geometry.hpp"
#include "calabi/radial_ode.hpp"
#include "calabi/root_finding.hpp"

namespace calabi {

struct ImagePoint {
  Eigen::VectorXd p;
  Eigen::VectorXd y;
};

namespace symplectic_detail {

inline void check_y(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size())
    throw Error(ErrorCode::invalid_params, "x and y blocks must have the same dimension");
}

inline Eigen::VectorXd stack(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd out(a.size() + b.size());
  out << a, b;
  return out;
}

}  // namespace symplectic_detail

template <RadialPotential P>
ImagePoint phi(const P& profile, const TubePoint& q) {
  symplectic_detail::check_y(q.x, q.y);
  return {grad_potential(profile, SpatialPoint{q.x}), q.y};
}

/// blockdiag(H(x), I).
template <RadialPotential P>
Eigen::MatrixXd phi_jacobian(const P& profile, const TubePoint& q) {
  symplectic_detail::check_y(q.x, q.y);
  const Eigen::MatrixXd H = hess_potential(profile, SpatialPoint{q.x});
  const Eigen::Index n = H.rows();
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  J.topLeftCorner(n, n) = H;
  J.bottomRightCorner(n, n).setIdentity();
  return J;
}

/// Inverse of Phi by a 1-D root find of Y'(rho) = |p| (Y' is strictly
/// increasing), then x = rho p / |p|.
inline TubePoint phi_inverse(const RadialProfile& profile, const ImagePoint& w) {
  symplectic_detail::check_y(w.p, w.y);
  if (w.p.size() != profile.n())
    throw Error(ErrorCode::invalid_params, "image point dimension does not match n");
  const double target = w.p.norm();
  if (!std::isfinite(target) || !w.y.allFinite())
    throw Error(ErrorCode::invalid_params, "image point must be finite");
  if (target == 0.0) return {Eigen::VectorXd::Zero(w.p.size()), w.y};

  const auto& grid = profile.grid();
  const auto& Yp = profile.Yp();
  if (!(target < Yp.back())) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "|p| = " << target << " is at or beyond Y'(r_max) = " << Yp.back()
        << "; re-solve with a larger blowup_threshold to reach it";
    throw Error(ErrorCode::image_beyond_profile, msg.str());
  }

  double lo, hi;
  if (target <= Yp.front()) {
    lo = 0.0;
    hi = grid.front();
  } else {
    const auto it = std::upper_bound(Yp.begin(), Yp.end(), target);
    const auto k = static_cast<std::size_t>(it - Yp.begin());
    lo = grid[k - 1];
    hi = grid[k];
  }
  auto fdf = [&](double rho) {
    const RadialState s = profile.eval_interpolant(rho);
    return std::pair{s.Yp - target, s.Ypp};
  };
  const double tol = 4.0 * std::numeric_limits<double>::epsilon() * hi;
  const RootResult root = safeguarded_newton(fdf, lo, hi, tol, 200);
  if (!root.converged) {
    std::ostringstream msg;
    msg << "root find for Y'(rho) = " << target << " did not converge in ["
        << lo << ", " << hi << "]";
    throw Error(ErrorCode::numerical_failure, msg.str());
  }
  return {(root.x / target) * w.p, w.y};
}

/// The standard form omega_0 = [[0, I], [-I, 0]] on R^2n.
inline Eigen::MatrixXd standard_symplectic(Eigen::Index n) {
  Eigen::MatrixXd Omega0 = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  Omega0.topRightCorner(n, n).setIdentity();
  Omega0.bottomLeftCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
  return Omega0;
}

/// max |J^T omega_0 J - Omega| over entries.
inline double pullback_residual(const Eigen::MatrixXd& J, const Eigen::MatrixXd& Omega) {
  const Eigen::MatrixXd Omega0 = standard_symplectic(J.rows() / 2);
  return (J.transpose() * Omega0 * J - Omega).cwiseAbs().maxCoeff();
}

template <RadialPotential P>
double pullback_residual_analytic(const P& profile, const TubePoint& q) {
  const Eigen::MatrixXd J = phi_jacobian(profile, q);
  return pullback_residual(J, two_form(hess_potential(profile, SpatialPoint{q.x})));
}

/// Same residual with J from central differences of Phi.
template <RadialPotential P>
double pullback_residual_fd(const P& profile, const TubePoint& q, double h) {
  if (!(h > 0.0) || !std::isfinite(h))
    throw Error(ErrorCode::invalid_step, "finite-difference step must be positive");
  symplectic_detail::check_y(q.x, q.y);
  const Eigen::MatrixXd H = hess_potential(profile, SpatialPoint{q.x});
  if (!(q.x.norm() + h < profile.r_max())) {
    std::ostringstream msg;
    msg << "stencil |x| + h = " << q.x.norm() + h
        << " leaves the computed domain (r_max = " << profile.r_max() << ")";
    throw Error(ErrorCode::stencil_out_of_domain, msg.str());
  }
  const Eigen::Index n = q.x.size();
  auto field = [&](const Eigen::VectorXd& z) {
    const ImagePoint w = phi(profile, TubePoint{z.head(n), z.tail(n)});
    return symplectic_detail::stack(w.p, w.y);
  };
  const Eigen::MatrixXd J = fd::jacobian(field, symplectic_detail::stack(q.x, q.y), h);
  return pullback_residual(J, two_form(H));
}

struct PropernessRow {
  double fraction;
  double r;
  double grad_norm;
};

/// |grad f| = Y'(r) at r = fraction * r_max; fractions ascending in [0, 1].
inline std::vector<PropernessRow> properness_table(const RadialProfile& profile,
                                                   const std::vector<double>& fractions) {
  if (!std::is_sorted(fractions.begin(), fractions.end()))
    throw Error(ErrorCode::invalid_params, "fractions must be sorted ascending");
  std::vector<PropernessRow> rows;
  rows.reserve(fractions.size());
  for (double f : fractions) {
    if (!(f >= 0.0) || !(f <= 1.0))
      throw Error(ErrorCode::invalid_params, "fractions must lie in [0, 1]");
    const double r = f * profile.r_max();
    rows.push_back({f, r, profile.eval(r).Yp});
  }
  return rows;
}

}  // namespace calabi

#endif  // CALABI_SYMPLECTIC_MAP_HPP
