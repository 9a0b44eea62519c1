#ifndef CALABI_VERIFICATION_HPP
#define CALABI_VERIFICATION_HPP

// Verification suite run by `calabi verify`: every check is a named value
// compared against a pinned tolerance, and the report passes only if all
// checks do.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "calabi/error.hpp"
#include "calabi/geometry.hpp"
#include "calabi/radial_ode.hpp"
#include "calabi/random.hpp"
#include "calabi/symplectic_map.hpp"
#include "calabi/text_format.hpp"

namespace calabi {

struct VerificationConfig {
  int samples = 50;           // Monge-Ampere and positivity points
  int ode_samples = 100;      // random off-node radii (on top of every interval)
  int pullback_samples = 200;
  int roundtrip_samples = 100;
  int einstein_points = 10;
  std::uint64_t seed = 1;

  // Sampling radii as fractions of r_max.
  double bulk_fraction = 0.9;
  double fd_fraction = 0.6;
  double positivity_fraction = 0.95;

  // Finite-difference steps as fractions of r_max.
  double pullback_h = 1e-4;
  double einstein_h = 1e-2;

  double tol_ode = 1e-6;
  double tol_monge_ampere = 1e-6;
  double tol_einstein_ratio = 0.5;  // |ratio - 4| under h-halving
  double tol_pullback_analytic = 1e-12;
  double tol_pullback_fd = 1e-6;
  double tol_roundtrip = 1e-10;
  double tol_properness_log2 = 1.0;  // final |grad f| within 2x of threshold
};

inline void validate(const VerificationConfig& c) {
  if (c.samples < 1 || c.ode_samples < 1 || c.pullback_samples < 1 ||
      c.roundtrip_samples < 1 || c.einstein_points < 1)
    throw Error(ErrorCode::invalid_params, "sample counts must be at least 1");
  for (double t : {c.tol_ode, c.tol_monge_ampere, c.tol_einstein_ratio,
                   c.tol_pullback_analytic, c.tol_pullback_fd, c.tol_roundtrip,
                   c.tol_properness_log2, c.pullback_h, c.einstein_h}) {
    if (!(t > 0.0)) throw Error(ErrorCode::invalid_params, "tolerances and steps must be positive");
  }
}

enum class Comparison { at_most, greater_than };

struct CheckResult {
  std::string name;
  double value;
  double tolerance;
  Comparison comparison;
  bool pass;
  std::string detail;
};

struct VerificationReport {
  std::vector<CheckResult> checks;
  bool overall_pass = false;

  const CheckResult* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

namespace verification_detail {

inline CheckResult make_check(std::string name, double value, double tol,
                              Comparison cmp, std::string detail) {
  const bool pass = cmp == Comparison::at_most ? (value <= tol) : (value > tol);
  return {std::move(name), value, tol, cmp, pass, std::move(detail)};
}

}  // namespace verification_detail

/// Standard properness fractions: uniform to 0.9 then clustering at r_max.
inline std::vector<double> default_properness_fractions() {
  return {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99, 0.999, 1.0};
}

inline VerificationReport run_verification(const RadialProfile& profile,
                                           const VerificationConfig& cfg) {
  using verification_detail::make_check;
  validate(cfg);
  const Eigen::Index n = profile.n();
  const double R = profile.r_max();
  Sampler sampler(cfg.seed);
  VerificationReport report;

  {
    double worst = max_interval_residual(profile);
    const double lo = profile.handoff();
    for (int i = 0; i < cfg.ode_samples; ++i) {
      double r = sampler.uniform(lo, R);
      worst = std::max(worst, ode_residual(profile, r));
    }
    report.checks.push_back(make_check(
        "ode_residual", worst, cfg.tol_ode, Comparison::at_most,
        "max relative ODE residual over interval quarter points and " +
            std::to_string(cfg.ode_samples) + " random radii"));
  }

  std::vector<Eigen::VectorXd> bulk;
  for (int i = 0; i < cfg.samples; ++i)
    bulk.push_back(sampler.in_ball(n, cfg.bulk_fraction * R));

  {
    double worst = 0.0;
    for (const auto& x : bulk) worst = std::max(worst, monge_ampere_residual(profile, SpatialPoint{x}));
    report.checks.push_back(make_check("monge_ampere", worst, cfg.tol_monge_ampere,
                                       Comparison::at_most, "max |log det H - f|"));
  }

  {
    double worst = 0.0;
    std::ostringstream detail;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    const double h = cfg.einstein_h * R;
    for (int i = 0; i < cfg.einstein_points; ++i) {
      const SpatialPoint pt{sampler.in_ball(n, cfg.fd_fraction * R)};
      const double ratio = einstein_residual(profile, pt, h) / einstein_residual(profile, pt, 0.5 * h);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
      worst = std::max(worst, std::isfinite(ratio) ? std::abs(ratio - 4.0)
                                                    : std::numeric_limits<double>::infinity());
    }
    detail << "max |ratio - 4| of einstein_residual under h-halving; ratios in ["
           << format_double(lo) << ", " << format_double(hi) << "]";
    report.checks.push_back(make_check("einstein", worst, cfg.tol_einstein_ratio,
                                       Comparison::at_most, detail.str()));
  }

  {
    double worst_analytic = 0.0, worst_fd = 0.0;
    const double h = cfg.pullback_h * R;
    for (int i = 0; i < cfg.pullback_samples; ++i) {
      const TubePoint q{sampler.in_ball(n, cfg.bulk_fraction * R), sampler.normal_vector(n)};
      worst_analytic = std::max(worst_analytic, pullback_residual_analytic(profile, q));
      const TubePoint qf{sampler.in_ball(n, cfg.fd_fraction * R), sampler.normal_vector(n)};
      worst_fd = std::max(worst_fd, pullback_residual_fd(profile, qf, h));
    }
    report.checks.push_back(make_check("pullback_analytic", worst_analytic,
                                       cfg.tol_pullback_analytic, Comparison::at_most,
                                       "max |J^T omega_0 J - Omega|"));
    report.checks.push_back(make_check("pullback_fd", worst_fd, cfg.tol_pullback_fd,
                                       Comparison::at_most,
                                       "same residual with finite-difference J"));
  }

  {
    double worst = 0.0;
    for (int i = 0; i < cfg.roundtrip_samples; ++i) {
      const TubePoint q{sampler.in_ball(n, cfg.bulk_fraction * R), sampler.normal_vector(n)};
      const TubePoint back = phi_inverse(profile, phi(profile, q));
      const double scale = std::max(q.x.norm(), std::numeric_limits<double>::min());
      double dev = (back.x - q.x).norm() / scale;
      if (back.y != q.y) dev = std::numeric_limits<double>::infinity();
      worst = std::max(worst, dev);
    }
    report.checks.push_back(make_check("roundtrip", worst, cfg.tol_roundtrip,
                                       Comparison::at_most,
                                       "max relative |phi_inverse(phi(q)) - q|"));
  }

  {
    double min_eig = std::numeric_limits<double>::infinity();
    for (int i = 0; i < cfg.samples; ++i) {
      const Eigen::VectorXd x = sampler.in_ball(n, cfg.positivity_fraction * R);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hess_potential(profile, SpatialPoint{x}),
                                                         Eigen::EigenvaluesOnly);
      min_eig = std::min(min_eig, eig.eigenvalues().minCoeff());
    }
    report.checks.push_back(make_check("positivity", min_eig, 0.0, Comparison::greater_than,
                                       "min eigenvalue of H"));
  }

  {
    const auto rows = properness_table(profile, default_properness_fractions());
    bool increasing = true;
    for (std::size_t i = 1; i < rows.size(); ++i)
      increasing = increasing && rows[i].grad_norm > rows[i - 1].grad_norm;
    const double tracking =
        std::abs(std::log2(rows.back().grad_norm / profile.params().blowup_threshold));
    report.checks.push_back(make_check(
        "properness", increasing ? tracking : std::numeric_limits<double>::infinity(),
        cfg.tol_properness_log2, Comparison::at_most,
        "|log2(|grad f|(r_max) / blowup_threshold)|; infinite if the table is not "
        "strictly increasing"));
  }

  report.overall_pass = std::all_of(report.checks.begin(), report.checks.end(),
                                    [](const CheckResult& c) { return c.pass; });
  return report;
}

}  // namespace calabi

#endif  // CALABI_VERIFICATION_HPP
