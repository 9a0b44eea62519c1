#ifndef CALABI_GEOMETRY_HPP
#define CALABI_GEOMETRY_HPP

// Potential, gradient, Hessian, Kahler two-form and metric of the radial
// potential f(x) = Y(|x|) on the tube D_a x R^n, in real coordinates
// (x_1..x_n, y_1..y_n):
//
//     Omega = [[0, H], [-H, 0]],   G = blockdiag(H, H),   H = Hess f.
//
// Everything is a pure function of a radial potential, so any type that
// provides eval(r) -> RadialState, n(), y0(), r_max() and a_est() can be
// used, including the synthetic control potentials below.

#include <cmath>
#include <concepts>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "calabi/error.hpp"
#include "calabi/finite_difference.hpp"
#include "calabi/radial_ode.hpp"

namespace calabi {

template <class P>
concept RadialPotential = requires(const P& p, double r) {
  { p.eval(r) } -> std::same_as<RadialState>;
  { p.n() } -> std::convertible_to<int>;
  { p.y0() } -> std::convertible_to<double>;
  { p.r_max() } -> std::convertible_to<double>;
  { p.a_est() } -> std::convertible_to<double>;
};

/// Closed-form radial potential used as a control in tests and scans.
class SyntheticPotential {
 public:
  using Fn = std::function<RadialState(double)>;

  SyntheticPotential(std::string name, int n, double r_max, double a_est, Fn fn)
      : name_(std::move(name)), n_(n), r_max_(r_max), a_est_(a_est),
        fn_(std::move(fn)) {}

  RadialState eval(double r) const {
    if (!(r >= 0.0) || !(r <= r_max_)) {
      std::ostringstream msg;
      msg << "radius " << r << " outside synthetic profile [0, " << r_max_ << "]";
      throw Error(ErrorCode::out_of_range, msg.str());
    }
    return fn_(r);
  }
  const std::string& name() const noexcept { return name_; }
  int n() const noexcept { return n_; }
  double y0() const { return fn_(0.0).Y; }
  double r_max() const noexcept { return r_max_; }
  double a_est() const noexcept { return a_est_; }

 private:
  std::string name_;
  int n_;
  double r_max_;
  double a_est_;
  Fn fn_;
};

/// Y = k r^2: constant Hessian 2k I, hence a flat metric.
inline SyntheticPotential quadratic_potential(int n, double k, double r_max = 1.0) {
  return SyntheticPotential("quadratic", n, r_max, 2.0 * r_max,
                            [k](double r) -> RadialState {
                              return {k * r * r, 2.0 * k * r, 2.0 * k};
                            });
}

/// Y = r^2/2 + r^4: smooth, convex, but not a Monge-Ampere solution.
inline SyntheticPotential quartic_potential(int n, double r_max = 1.0) {
  return SyntheticPotential("quartic", n, r_max, 2.0 * r_max,
                            [](double r) -> RadialState {
                              const double r2 = r * r;
                              return {0.5 * r2 + r2 * r2, r + 4.0 * r2 * r,
                                      1.0 + 12.0 * r2};
                            });
}

struct SpatialPoint {
  Eigen::VectorXd x;
};

struct TubePoint {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
};

struct GeometryMatrices {
  Eigen::MatrixXd H;
  Eigen::MatrixXd Omega;
  Eigen::MatrixXd G;
};

namespace geometry_detail {

template <RadialPotential P>
double checked_radius(const P& profile, const Eigen::VectorXd& x) {
  if (x.size() != profile.n()) {
    std::ostringstream msg;
    msg << "point has dimension " << x.size() << ", profile has n = "
        << profile.n();
    throw Error(ErrorCode::invalid_params, msg.str());
  }
  const double r = x.norm();
  if (!(r < profile.r_max())) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "|x| = " << r << " is outside the computed domain (r_max = "
        << profile.r_max() << ")";
    if (r >= profile.a_est()) msg << " and beyond the blow-up radius a_est = "
                                  << profile.a_est();
    throw Error(ErrorCode::outside_computed_domain, msg.str());
  }
  return r;
}

template <RadialPotential P>
Eigen::MatrixXd hessian_at_radius(const P& profile, const Eigen::VectorXd& x,
                                  double r) {
  const auto n = static_cast<Eigen::Index>(profile.n());
  const RadialState s = profile.eval(r);
  if (r == 0.0) return s.Ypp * Eigen::MatrixXd::Identity(n, n);
  const double tangential = s.Yp / r;
  const Eigen::VectorXd u = x / r;
  const double radial_excess = s.Ypp - tangential;
  Eigen::MatrixXd H(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j; i < n; ++i) {
      H(i, j) = radial_excess * (u(i) * u(j)) + (i == j ? tangential : 0.0);
      H(j, i) = H(i, j);
    }
  }
  return H;
}

inline double log_det_spd(const Eigen::MatrixXd& H) {
  Eigen::LLT<Eigen::MatrixXd> llt(H);
  if (llt.info() != Eigen::Success) return std::numeric_limits<double>::quiet_NaN();
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace geometry_detail

template <RadialPotential P>
double potential(const P& profile, const SpatialPoint& pt) {
  return profile.eval(geometry_detail::checked_radius(profile, pt.x)).Y;
}

/// (Y'(r)/r) x, with the zero vector at the origin.
template <RadialPotential P>
Eigen::VectorXd grad_potential(const P& profile, const SpatialPoint& pt) {
  const double r = geometry_detail::checked_radius(profile, pt.x);
  if (r == 0.0) return Eigen::VectorXd::Zero(pt.x.size());
  return (profile.eval(r).Yp / r) * pt.x;
}

/// (Y'/r) I + (Y'' - Y'/r) x x^T / r^2, and Y''(0) I at the origin.
template <RadialPotential P>
Eigen::MatrixXd hess_potential(const P& profile, const SpatialPoint& pt) {
  const double r = geometry_detail::checked_radius(profile, pt.x);
  return geometry_detail::hessian_at_radius(profile, pt.x, r);
}

/// [[0, H], [-H, 0]] for a given H.
inline Eigen::MatrixXd two_form(const Eigen::MatrixXd& H) {
  const Eigen::Index n = H.rows();
  Eigen::MatrixXd Omega = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  Omega.topRightCorner(n, n) = H;
  Omega.bottomLeftCorner(n, n) = -H;
  return Omega;
}

/// blockdiag(H, H) for a given H.
inline Eigen::MatrixXd metric_matrix(const Eigen::MatrixXd& H) {
  const Eigen::Index n = H.rows();
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  G.topLeftCorner(n, n) = H;
  G.bottomRightCorner(n, n) = H;
  return G;
}

template <RadialPotential P>
GeometryMatrices assemble(const P& profile, const SpatialPoint& pt) {
  Eigen::MatrixXd H = hess_potential(profile, pt);
  Eigen::MatrixXd Omega = two_form(H);
  Eigen::MatrixXd G = metric_matrix(H);
  return {std::move(H), std::move(Omega), std::move(G)};
}

/// |log det H(x) - f(x)|; vanishes exactly when det Hess f = e^f.
template <RadialPotential P>
double monge_ampere_residual(const P& profile, const SpatialPoint& pt) {
  const double r = geometry_detail::checked_radius(profile, pt.x);
  const double log_det =
      geometry_detail::log_det_spd(geometry_detail::hessian_at_radius(profile, pt.x, r));
  if (std::isnan(log_det)) return std::numeric_limits<double>::infinity();
  return std::abs(log_det - profile.eval(r).Y);
}

/// max-norm of FDHess(log det H) - H at x with central step h.
///
/// The Ricci form of the Kahler metric is -(i/2) d dbar log det H, so this
/// vanishes up to O(h^2) exactly when Ric = -omega.
template <RadialPotential P>
double einstein_residual(const P& profile, const SpatialPoint& pt, double h) {
  if (!(h > 0.0) || !std::isfinite(h))
    throw Error(ErrorCode::invalid_step, "finite-difference step must be positive");
  const double r = geometry_detail::checked_radius(profile, pt.x);
  if (!(r + 2.0 * h < profile.r_max())) {
    std::ostringstream msg;
    msg << "stencil |x| + 2h = " << r + 2.0 * h
        << " leaves the computed domain (r_max = " << profile.r_max() << ")";
    throw Error(ErrorCode::stencil_out_of_domain, msg.str());
  }
  auto log_det = [&](const Eigen::VectorXd& u) {
    return geometry_detail::log_det_spd(
        geometry_detail::hessian_at_radius(profile, u, u.norm()));
  };
  const Eigen::MatrixXd fd = fd::hessian(log_det, pt.x, h);
  return (fd - geometry_detail::hessian_at_radius(profile, pt.x, r))
      .cwiseAbs()
      .maxCoeff();
}

}  // namespace calabi

#endif  // CALABI_GEOMETRY_HPP
