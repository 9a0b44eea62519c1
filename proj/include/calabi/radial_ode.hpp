#ifndef CALABI_RADIAL_ODE_HPP
#define CALABI_RADIAL_ODE_HPP

// Radial reduction of the Kahler-Einstein Monge-Ampere equation,
//
//     (Y'/r)^(n-1) Y'' = e^Y,   Y'(0) = 0,   Y''(0) = e^(Y(0)/n),
//
// integrated outward from a Taylor start near the removable singularity at
// r = 0 until Y' crosses a blow-up threshold. The finite blow-up radius a is
// extrapolated from the tail, where Y' ~ (n+1)/(a-r).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "calabi/dormand_prince.hpp"
#include "calabi/error.hpp"
#include "calabi/hermite.hpp"

namespace calabi {

struct PotentialParams {
  int n = 2;
  double y0 = 0.0;
  double rel_tol = 1e-12;
  double abs_tol = 1e-14;
  double blowup_threshold = 1e5;
  long max_steps = 1'000'000;
  /// Admits n = 1, where the ODE is well posed but outside the n >= 2 theory.
  bool experimental = false;

  friend bool operator==(const PotentialParams&,
                         const PotentialParams&) = default;
};

/// Dense-output coefficients of one interval, in theta = (r - r_i) / width.
struct IntervalPoly {
  SepticCoeffs Y;
  QuinticCoeffs Yp;
};

/// Y, Y' and Y'' at one radius.
struct RadialState {
  double Y;
  double Yp;
  double Ypp;
};

struct SeriesState {
  double Y;
  double Yp;
};

namespace radial_constants {
/// Handoff radius from the series to the integrator, in units of the
/// natural length scale e^(-y0/(2n)).
inline constexpr double handoff_fraction = 1e-4;
/// Largest admissible handoff radius, same units.
inline constexpr double handoff_cap_fraction = 1e-2;
/// Integration stops if the step shrinks below this fraction of r.
inline constexpr double step_floor = 1e-14;
/// Tail nodes used for the blow-up fit satisfy Y' >= threshold / tail_span.
inline constexpr double tail_span = 100.0;
inline constexpr std::size_t min_tail_nodes = 5;
/// Accepted relative deviation of the fitted Y'(a - r) from n + 1.
inline constexpr double tail_model_tolerance = 1e-2;
}  // namespace radial_constants

inline void validate(const PotentialParams& p) {
  auto fail = [](ErrorCode code, const std::string& msg) {
    throw Error(code, msg);
  };
  if (p.n < 1) fail(ErrorCode::invalid_params, "n must be a positive integer");
  if (p.n == 1 && !p.experimental)
    fail(ErrorCode::experimental_dimension,
         "n must be \xE2\x89\xA5 2 (see --experimental)");
  if (!std::isfinite(p.y0)) fail(ErrorCode::invalid_params, "y0 must be finite");
  if (!(p.rel_tol > 0.0) || !(p.abs_tol > 0.0))
    fail(ErrorCode::invalid_params, "rel_tol and abs_tol must be positive");
  if (!(p.blowup_threshold > std::exp(p.y0 / p.n)) ||
      !std::isfinite(p.blowup_threshold))
    fail(ErrorCode::invalid_params,
         "blowup_threshold must be finite and exceed e^(y0/n)");
  if (p.max_steps <= 0) fail(ErrorCode::invalid_params, "max_steps must be positive");
}

/// Natural length scale: the solution for y0 is the y0 = 0 solution
/// compressed by e^(y0/(2n)).
inline double length_scale(const PotentialParams& p) {
  return std::exp(-p.y0 / (2.0 * p.n));
}

inline double handoff_radius(const PotentialParams& p) {
  return radial_constants::handoff_fraction * length_scale(p);
}

inline double handoff_cap(const PotentialParams& p) {
  return radial_constants::handoff_cap_fraction * length_scale(p);
}

/// Y = y0 + (b/2) r^2 + c r^4 + O(r^6).
struct SeriesCoefficients {
  double b;
  double c;
};

inline SeriesCoefficients series_coefficients(const PotentialParams& p) {
  const double b = std::exp(p.y0 / p.n);
  return {b, b * b / (8.0 * (p.n + 2))};
}

/// Truncated series state at the handoff radius r0.
inline SeriesState series_start(const PotentialParams& p, double r0) {
  if (!(r0 > 0.0) || !(r0 <= handoff_cap(p))) {
    std::ostringstream msg;
    msg << "handoff radius " << r0 << " must lie in (0, " << handoff_cap(p)
        << "]";
    throw Error(ErrorCode::invalid_handoff, msg.str());
  }
  const auto [b, c] = series_coefficients(p);
  const double r2 = r0 * r0;
  return {p.y0 + r2 * (0.5 * b + c * r2), r0 * (b + 4.0 * c * r2)};
}

/// Series branch of the profile, valid for 0 <= r <= handoff.
inline RadialState series_state(const PotentialParams& p, double r) {
  const auto [b, c] = series_coefficients(p);
  const double r2 = r * r;
  return {p.y0 + r2 * (0.5 * b + c * r2), r * (b + 4.0 * c * r2),
          b + 12.0 * c * r2};
}

/// Y'' from the ODE: e^Y (r/Y')^(n-1).
inline double ode_second_derivative(int n, double r, double Y, double Yp) {
  return std::exp(Y + (n - 1) * std::log(r / Yp));
}

/// Y''' from differentiating log Y'' = Y + (n-1)(log r - log Y').
inline double ode_third_derivative(int n, double r, double Yp, double Ypp) {
  return Ypp * (Yp + (n - 1) * (1.0 / r - Ypp / Yp));
}

struct RadiusEstimate {
  double a_est;
  double a_err;
  /// Fitted C in Y' ~ C / (a - r); the model predicts n + 1.
  double leading_coefficient;
  bool model_accepted;
};

/// Dense numerical solution r -> (Y, Y', Y'') on [0, r_max].
///
/// Nodes carry (Y, Y'). On each interval Y is interpolated by the two-point
/// septic Hermite polynomial through Y, Y' and the ODE values of Y'', Y'''
/// at both ends, and Y' by the quintic Hermite polynomial through Y', Y'',
/// Y'''. The separate Y' polynomial keeps Y'' accurate where |Y| is large
/// compared with its increment across an interval. Below the first node the
/// Taylor series is used. Immutable once built.
class RadialProfile {
 public:
  RadialProfile(PotentialParams params, std::vector<double> grid,
                std::vector<double> Y, std::vector<double> Yp, double a_est,
                double a_err)
      : params_(params),
        grid_(std::move(grid)),
        Y_(std::move(Y)),
        Yp_(std::move(Yp)),
        a_est_(a_est),
        a_err_(a_err) {
    if (grid_.size() < 2 || Y_.size() != grid_.size() ||
        Yp_.size() != grid_.size())
      throw Error(ErrorCode::format_error,
                  "profile needs at least two nodes with matching Y, Y' arrays");
    build_interpolant();
  }

  const PotentialParams& params() const noexcept { return params_; }
  int n() const noexcept { return params_.n; }
  double y0() const noexcept { return params_.y0; }
  double handoff() const noexcept { return grid_.front(); }
  double r_max() const noexcept { return grid_.back(); }
  double a_est() const noexcept { return a_est_; }
  double a_err() const noexcept { return a_err_; }
  std::size_t size() const noexcept { return grid_.size(); }
  const std::vector<double>& grid() const noexcept { return grid_; }
  const std::vector<double>& Y() const noexcept { return Y_; }
  const std::vector<double>& Yp() const noexcept { return Yp_; }
  const std::vector<IntervalPoly>& coeffs() const noexcept { return coeffs_; }

  /// Same nodes with a new blow-up estimate attached.
  RadialProfile with_radius(double a_est, double a_err) const {
    RadialProfile copy = *this;
    copy.a_est_ = a_est;
    copy.a_err_ = a_err;
    return copy;
  }

  /// Dense evaluation; Y'' comes from the ODE identity (series limit at 0).
  RadialState eval(double r) const {
    check_range(r);
    if (r < grid_.front()) return series_state(params_, r);
    const std::size_t i = interval_index(r);
    if (r == grid_[i]) return node_state(i);
    if (r == grid_[i + 1]) return node_state(i + 1);
    const double width = grid_[i + 1] - grid_[i];
    const double theta = (r - grid_[i]) / width;
    const double Y = evaluate_poly(coeffs_[i].Y, theta).p;
    const double Yp = evaluate_poly(coeffs_[i].Yp, theta).p;
    return {Y, Yp, ode_second_derivative(params_.n, r, Y, Yp)};
  }

  /// Dense evaluation with Y'' taken from the derivative of the Y'
  /// interpolant rather than the ODE.
  RadialState eval_interpolant(double r) const {
    check_range(r);
    if (r < grid_.front()) return series_state(params_, r);
    const std::size_t i = interval_index(r);
    const double width = grid_[i + 1] - grid_[i];
    const double theta = (r - grid_[i]) / width;
    const PolyValue slope = evaluate_poly(coeffs_[i].Yp, theta);
    return {evaluate_poly(coeffs_[i].Y, theta).p, slope.p, slope.dp / width};
  }

  /// Node state with Y'' from the ODE.
  RadialState node_state(std::size_t i) const {
    return {Y_[i], Yp_[i],
            ode_second_derivative(params_.n, grid_[i], Y_[i], Yp_[i])};
  }

 private:
  void check_range(double r) const {
    if (!(r >= 0.0) || !(r <= r_max())) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "radius " << r << " outside computed profile [0, " << r_max()
          << "] (r_max = " << r_max() << ", a_est = " << a_est_ << ")";
      throw Error(ErrorCode::out_of_range, msg.str());
    }
  }

  // Index i with grid[i] <= r <= grid[i+1]; requires r in [grid[0], r_max].
  std::size_t interval_index(double r) const {
    auto it = std::upper_bound(grid_.begin(), grid_.end(), r);
    std::size_t i = static_cast<std::size_t>(it - grid_.begin());
    i = i == 0 ? 0 : i - 1;
    return std::min(i, grid_.size() - 2);
  }

  Jet3 node_jet(std::size_t i) const {
    const int n = params_.n;
    const double Ypp = ode_second_derivative(n, grid_[i], Y_[i], Yp_[i]);
    return {Y_[i], Yp_[i], Ypp,
            ode_third_derivative(n, grid_[i], Yp_[i], Ypp)};
  }

  void build_interpolant() {
    coeffs_.resize(grid_.size() - 1);
    Jet3 left = node_jet(0);
    for (std::size_t i = 0; i + 1 < grid_.size(); ++i) {
      const Jet3 right = node_jet(i + 1);
      const double width = grid_[i + 1] - grid_[i];
      coeffs_[i].Y = hermite_septic(left, right, width);
      coeffs_[i].Yp = hermite_quintic({left.d1, left.d2, left.d3},
                                      {right.d1, right.d2, right.d3}, width);
      left = right;
    }
  }

  PotentialParams params_;
  std::vector<double> grid_;
  std::vector<double> Y_;
  std::vector<double> Yp_;
  std::vector<IntervalPoly> coeffs_;
  double a_est_;
  double a_err_;
};

/// Returns a description of the first violated structural invariant.
inline std::optional<std::string> find_invariant_violation(
    const RadialProfile& profile) {
  const auto& g = profile.grid();
  const auto& Y = profile.Y();
  const auto& Yp = profile.Yp();
  const PotentialParams& p = profile.params();
  if (!(g.front() > 0.0) || !(g.front() <= handoff_cap(p)))
    return "first node must be a valid series handoff radius";
  const SeriesState start = series_start(p, g.front());
  if (std::abs(Yp.front() - start.Yp) > 1e-12 * start.Yp ||
      std::abs(Y.front() - start.Y) > 1e-12 * std::max(1.0, std::abs(start.Y)))
    return "first node does not match the series start";
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!std::isfinite(g[i]) || !std::isfinite(Y[i]) || !std::isfinite(Yp[i]))
      return "non-finite node value at index " + std::to_string(i);
    if (!(Yp[i] > 0.0)) return "Y' not positive at node " + std::to_string(i);
    if (i > 0) {
      if (!(g[i] > g[i - 1]))
        return "grid not strictly increasing at node " + std::to_string(i);
      if (!(Yp[i] > Yp[i - 1]))
        return "Y' not strictly increasing at node " + std::to_string(i);
      if (!(Y[i] > Y[i - 1]))
        return "Y not strictly increasing at node " + std::to_string(i);
    }
  }
  if (!(profile.a_err() >= 0.0)) return "a_err must be nonnegative";
  if (!(profile.r_max() < profile.a_est())) return "r_max must be below a_est";
  return std::nullopt;
}

/// Thrown when integration ends before the blow-up threshold; carries the
/// nodes computed so far (a_est and a_err are +inf).
class IncompleteProfileError : public Error {
 public:
  IncompleteProfileError(const std::string& what,
                         std::shared_ptr<const RadialProfile> partial)
      : Error(ErrorCode::incomplete_profile, what),
        partial_(std::move(partial)) {}

  const RadialProfile* partial() const noexcept { return partial_.get(); }

 private:
  std::shared_ptr<const RadialProfile> partial_;
};

namespace radial_detail {

// Least-squares quadratic u(t) = p0 + p1 t + p2 t^2 (degree 1 if linear) on
// u = 1/Y' over the given node range, in t = (r - r_last) / width. Returns
// the smallest positive root mapped back to r and dr/du there.
struct TailFit {
  double a;
  double leading;  // C such that Y' ~ C / (a - r)
  bool ok;
};

inline TailFit fit_tail(const RadialProfile& profile, std::size_t first,
                        std::size_t last, bool quadratic) {
  const auto& g = profile.grid();
  const auto& Yp = profile.Yp();
  const double r_last = g[last];
  const double width = r_last - g[first];
  const int cols = quadratic ? 3 : 2;
  const auto rows = static_cast<Eigen::Index>(last - first + 1);
  Eigen::MatrixXd A(rows, cols);
  Eigen::VectorXd u(rows);
  for (Eigen::Index k = 0; k < rows; ++k) {
    const std::size_t i = first + static_cast<std::size_t>(k);
    const double t = (g[i] - r_last) / width;
    A(k, 0) = 1.0;
    A(k, 1) = t;
    if (quadratic) A(k, 2) = t * t;
    u(k) = 1.0 / Yp[i];
  }
  const Eigen::VectorXd p = A.colPivHouseholderQr().solve(u);
  const double p0 = p(0), p1 = p(1), p2 = quadratic ? p(2) : 0.0;

  double t_root;
  if (p2 == 0.0) {
    if (!(p1 < 0.0)) return {0.0, 0.0, false};
    t_root = -p0 / p1;
  } else {
    const double disc = p1 * p1 - 4.0 * p0 * p2;
    if (!(disc >= 0.0) || !(p1 < 0.0)) return {0.0, 0.0, false};
    t_root = 2.0 * p0 / (-p1 + std::sqrt(disc));
  }
  const double slope = (p1 + 2.0 * p2 * t_root) / width;  // du/dr at root
  if (!(t_root > 0.0) || !(slope < 0.0)) return {0.0, 0.0, false};
  return {r_last + t_root * width, -1.0 / slope, true};
}

}  // namespace radial_detail

/// Extrapolates the blow-up radius from the profile tail by fitting
/// 1/Y' = (a - r)/C + O((a - r)^2) on nested windows of trailing nodes.
///
/// a_est comes from the innermost window; a_err is the spread of the other
/// windows around it plus the gap to a linear fit on the innermost window.
/// If the fitted C departs from n + 1 the model is rejected and a is only
/// bracketed in (r_max, r_max + 2(n+1)/Y'(r_max)).
inline RadiusEstimate estimate_radius(const RadialProfile& profile) {
  using namespace radial_constants;
  const auto& Yp = profile.Yp();
  const double threshold = profile.params().blowup_threshold;
  if (!(Yp.back() >= threshold))
    throw Error(ErrorCode::insufficient_tail,
                "profile did not reach the blow-up threshold");

  const double floor = threshold / tail_span;
  const std::size_t last = Yp.size() - 1;
  std::size_t first = last;
  while (first > 0 && Yp[first - 1] >= floor) --first;
  const std::size_t usable = last - first + 1;
  if (usable < min_tail_nodes) {
    std::ostringstream msg;
    msg << "tail too short to fit: " << usable << " usable nodes (need "
        << min_tail_nodes << ")";
    throw Error(ErrorCode::insufficient_tail, msg.str());
  }

  std::vector<radial_detail::TailFit> fits;
  for (std::size_t k = usable; k >= min_tail_nodes; k /= 2) {
    fits.push_back(radial_detail::fit_tail(profile, last + 1 - k, last, true));
    if (k / 2 < min_tail_nodes) break;
  }
  const radial_detail::TailFit inner = fits.back();
  const radial_detail::TailFit linear = radial_detail::fit_tail(
      profile, last + 1 - std::min<std::size_t>(usable, min_tail_nodes), last,
      false);

  const double n1 = profile.n() + 1.0;
  bool accepted = linear.ok;
  for (const auto& f : fits) {
    accepted = accepted && f.ok && f.a > profile.r_max() &&
               std::abs(f.leading / n1 - 1.0) <= tail_model_tolerance;
  }
  if (!accepted) {
    const double width = 2.0 * n1 / Yp.back();
    return {profile.r_max() + 0.5 * width, 0.5 * width,
            inner.ok ? inner.leading : 0.0, false};
  }
  double spread = std::abs(linear.a - inner.a);
  for (const auto& f : fits) spread = std::max(spread, std::abs(f.a - inner.a));
  return {inner.a, spread, inner.leading, true};
}

/// Integrates the radial ODE from the series handoff until Y' reaches the
/// blow-up threshold, then attaches the extrapolated blow-up radius.
inline RadialProfile solve_radial(const PotentialParams& params) {
  validate(params);
  using Stepper = DormandPrince54<2>;
  using State = Stepper::State;

  const int n = params.n;
  auto rhs = [n](double r, const State& u) -> State {
    return {u[1], ode_second_derivative(n, r, u[0], u[1])};
  };

  double r = handoff_radius(params);
  const SeriesState start = series_start(params, r);
  State u{start.Y, start.Yp};
  State k1 = rhs(r, u);

  std::vector<double> grid{r}, Y{u[0]}, Yp{u[1]};
  const double inf = std::numeric_limits<double>::infinity();
  auto partial = [&](const std::string& why) {
    return IncompleteProfileError(
        why, std::make_shared<const RadialProfile>(params, grid, Y, Yp, inf,
                                                   inf));
  };

  double h = r;
  long attempts = 0;
  while (u[1] < params.blowup_threshold) {
    if (attempts++ >= params.max_steps)
      throw partial("max_steps exhausted before Y' reached the blow-up threshold");
    if (h < radial_constants::step_floor * r)
      throw partial("step size fell below the floor before the blow-up threshold");

    const double r_next = r + h;
    const double h_eff = r_next - r;
    const auto trial = Stepper::step(rhs, r, u, k1, h_eff);
    double err = Stepper::error_norm(u, trial.y, trial.error, params.rel_tol,
                                     params.abs_tol);
    const bool finite = std::isfinite(trial.y[0]) && std::isfinite(trial.y[1]) &&
                        std::isfinite(trial.dy[1]) && trial.y[1] > 0.0;
    if (!finite || !std::isfinite(err)) {
      h *= 0.25;
      continue;
    }
    if (err <= 1.0) {
      if (!(trial.y[1] > u[1]) || !(trial.y[0] > u[0]))
        throw Error(ErrorCode::internal_consistency,
                    "accepted step broke monotonicity of Y or Y'");
      r = r_next;
      u = trial.y;
      k1 = trial.dy;
      grid.push_back(r);
      Y.push_back(u[0]);
      Yp.push_back(u[1]);
    }
    const double factor =
        err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    h = h_eff * (err <= 1.0 ? factor : std::min(factor, 1.0));
  }

  RadialProfile nodes(params, std::move(grid), std::move(Y), std::move(Yp),
                      inf, inf);
  const RadiusEstimate est = estimate_radius(nodes);
  RadialProfile profile = nodes.with_radius(est.a_est, est.a_err);
  if (auto bad = find_invariant_violation(profile))
    throw Error(ErrorCode::internal_consistency, "solved profile: " + *bad);
  return profile;
}

inline RadialState eval(const RadialProfile& profile, double r) {
  return profile.eval(r);
}

/// |(Y'/r)^(n-1) Y'' - e^Y| / e^Y with Y'' from differentiating the dense
/// interpolant of Y'.
inline double ode_residual(const RadialProfile& profile, double r) {
  if (r <= profile.handoff() && r >= 0.0) {
    throw Error(ErrorCode::use_series_residual,
                "radius lies in the series region; the series residual covers it");
  }
  const RadialState s = profile.eval_interpolant(r);
  if (!(s.Ypp > 0.0) || !(s.Yp > 0.0))
    return std::numeric_limits<double>::infinity();
  const double log_ratio =
      (profile.n() - 1) * std::log(s.Yp / r) + std::log(s.Ypp) - s.Y;
  return std::abs(std::expm1(log_ratio));
}

/// Largest ode_residual over the interior quarter points of every interval.
inline double max_interval_residual(const RadialProfile& profile) {
  const auto& g = profile.grid();
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    for (double q : {0.25, 0.5, 0.75}) {
      worst = std::max(worst, ode_residual(profile, g[i] + q * (g[i + 1] - g[i])));
    }
  }
  return worst;
}

/// Profile of Y~(r) = Y(lambda r) + 2n log(lambda), built by transforming the
/// nodes. The blow-up threshold scales with Y' so the tail stays consistent.
inline RadialProfile rescale(const RadialProfile& profile, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw Error(ErrorCode::invalid_scale, "scale factor must be positive and finite");
  if (lambda == 1.0) return profile;

  PotentialParams p = profile.params();
  const double shift = 2.0 * p.n * std::log(lambda);
  p.y0 += shift;
  p.blowup_threshold *= lambda;

  std::vector<double> grid(profile.grid()), Y(profile.Y()), Yp(profile.Yp());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i] /= lambda;
    Y[i] += shift;
    Yp[i] *= lambda;
  }
  return RadialProfile(p, std::move(grid), std::move(Y), std::move(Yp),
                       profile.a_est() / lambda, profile.a_err() / lambda);
}

}  // namespace calabi

#endif  // CALABI_RADIAL_ODE_HPP
