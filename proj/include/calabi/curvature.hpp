#ifndef CALABI_CURVATURE_HPP
#define CALABI_CURVATURE_HPP

// Sectional curvature by finite differences of the metric.
//
// Christoffel symbols come from central differences of G with step h, and
// their derivatives from central differences of those symbols, so the
// stencil reaches 2h from the base point. The tensor is assembled with the
// coordinate formula
//
//   R^a_{bcd} = d_c Gamma^a_{db} - d_d Gamma^a_{cb}
//             + Gamma^a_{ce} Gamma^e_{db} - Gamma^a_{de} Gamma^e_{cb},
//
// i.e. R(d_c, d_d) d_b = R^a_{bcd} d_a, and K(u, v) = <R(u,v)v, u> / |u ^ v|^2
// is positive on round spheres.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "calabi/error.hpp"
#include "calabi/geometry.hpp"
#include "calabi/random.hpp"

namespace calabi {

/// Dense rank-3 or rank-4 array over a fixed dimension.
class IndexedArray {
 public:
  IndexedArray(int dim, int rank)
      : dim_(dim), data_(static_cast<std::size_t>(std::pow(dim, rank)), 0.0) {}

  int dim() const noexcept { return dim_; }
  double& operator()(int a, int b, int c) { return data_[index(a, b, c)]; }
  double operator()(int a, int b, int c) const { return data_[index(a, b, c)]; }
  double& operator()(int a, int b, int c, int d) {
    return data_[index(a, b, c) * dim_ + d];
  }
  double operator()(int a, int b, int c, int d) const {
    return data_[index(a, b, c) * dim_ + d];
  }
  const std::vector<double>& data() const noexcept { return data_; }
  std::vector<double>& data() noexcept { return data_; }

 private:
  std::size_t index(int a, int b, int c) const {
    return (static_cast<std::size_t>(a) * dim_ + b) * dim_ + c;
  }
  int dim_;
  std::vector<double> data_;
};

/// Gamma^a_{bc} at q from central differences of the metric field.
template <class MetricField>
IndexedArray christoffel_fd(MetricField&& metric, const Eigen::VectorXd& q,
                            double h) {
  const int dim = static_cast<int>(q.size());
  std::vector<Eigen::MatrixXd> dG(dim);
  Eigen::VectorXd p = q;
  for (int c = 0; c < dim; ++c) {
    p(c) = q(c) + h;
    const Eigen::MatrixXd plus = metric(p);
    p(c) = q(c) - h;
    const Eigen::MatrixXd minus = metric(p);
    p(c) = q(c);
    dG[c] = (plus - minus) / (2.0 * h);
  }
  const Eigen::MatrixXd Ginv = metric(q).inverse();

  IndexedArray gamma(dim, 3);
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b)
      for (int c = 0; c < dim; ++c) {
        double sum = 0.0;
        for (int d = 0; d < dim; ++d)
          sum += Ginv(a, d) * (dG[b](d, c) + dG[c](d, b) - dG[d](b, c));
        gamma(a, b, c) = 0.5 * sum;
      }
  return gamma;
}

/// Riemann tensor with all indices lowered, R_{abcd} = G_{ae} R^e_{bcd},
/// together with the metric at the base point.
struct RiemannTensor {
  Eigen::MatrixXd G;
  IndexedArray R;
};

template <class MetricField>
RiemannTensor riemann_fd(MetricField&& metric, const Eigen::VectorXd& q,
                         double h) {
  const int dim = static_cast<int>(q.size());
  const IndexedArray gamma = christoffel_fd(metric, q, h);

  std::vector<IndexedArray> dgamma;  // dgamma[e](a,b,c) = d_e Gamma^a_{bc}
  dgamma.reserve(dim);
  Eigen::VectorXd p = q;
  for (int e = 0; e < dim; ++e) {
    p(e) = q(e) + h;
    const IndexedArray plus = christoffel_fd(metric, p, h);
    p(e) = q(e) - h;
    const IndexedArray minus = christoffel_fd(metric, p, h);
    p(e) = q(e);
    IndexedArray diff(dim, 3);
    for (std::size_t k = 0; k < diff.data().size(); ++k)
      diff.data()[k] = (plus.data()[k] - minus.data()[k]) / (2.0 * h);
    dgamma.push_back(std::move(diff));
  }

  IndexedArray upper(dim, 4);  // R^a_{bcd}
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b)
      for (int c = 0; c < dim; ++c)
        for (int d = 0; d < dim; ++d) {
          double v = dgamma[c](a, d, b) - dgamma[d](a, c, b);
          for (int e = 0; e < dim; ++e)
            v += gamma(a, c, e) * gamma(e, d, b) - gamma(a, d, e) * gamma(e, c, b);
          upper(a, b, c, d) = v;
        }

  Eigen::MatrixXd G = metric(q);
  IndexedArray lower(dim, 4);
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b)
      for (int c = 0; c < dim; ++c)
        for (int d = 0; d < dim; ++d) {
          double v = 0.0;
          for (int e = 0; e < dim; ++e) v += G(a, e) * upper(e, b, c, d);
          lower(a, b, c, d) = v;
        }
  return {std::move(G), std::move(lower)};
}

/// Smallest admissible |u ^ v|^2 / (|u|^2 |v|^2) in the metric G.
inline constexpr double plane_degeneracy_floor = 1e-12;

/// G-orthonormal basis (e1, e2) of span{u, v}; throws on degenerate planes.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> orthonormal_plane(
    const Eigen::MatrixXd& G, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  const double uu = u.dot(G * u);
  const double vv = v.dot(G * v);
  const double uv = u.dot(G * v);
  const double gram = uu * vv - uv * uv;
  if (!(uu > 0.0) || !(vv > 0.0) || !(gram >= plane_degeneracy_floor * uu * vv)) {
    std::ostringstream msg;
    msg << "degenerate plane: normalized Gram determinant "
        << (uu > 0.0 && vv > 0.0 ? gram / (uu * vv) : 0.0) << " below "
        << plane_degeneracy_floor;
    throw Error(ErrorCode::degenerate_plane, msg.str());
  }
  const Eigen::VectorXd e1 = u / std::sqrt(uu);
  Eigen::VectorXd w = v - e1.dot(G * v) * e1;
  return {e1, w / std::sqrt(w.dot(G * w))};
}

/// K(u, v) from a precomputed tensor.
inline double sectional_curvature(const RiemannTensor& riemann,
                                  const Eigen::VectorXd& u,
                                  const Eigen::VectorXd& v) {
  const auto [e1, e2] = orthonormal_plane(riemann.G, u, v);
  const int dim = riemann.R.dim();
  double k = 0.0;
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b)
      for (int c = 0; c < dim; ++c)
        for (int d = 0; d < dim; ++d)
          k += riemann.R(a, b, c, d) * e1(a) * e2(b) * e1(c) * e2(d);
  return k;
}

namespace curvature_detail {

template <RadialPotential P>
void check_stencil(const P& profile, const Eigen::VectorXd& x, double h) {
  if (!(h > 0.0) || !std::isfinite(h))
    throw Error(ErrorCode::invalid_step, "finite-difference step must be positive");
  const double r = geometry_detail::checked_radius(profile, x);
  if (!(r + 2.0 * h < profile.r_max())) {
    std::ostringstream msg;
    msg << "curvature stencil |x| + 2h = " << r + 2.0 * h
        << " leaves the computed domain (r_max = " << profile.r_max() << ")";
    throw Error(ErrorCode::stencil_out_of_domain, msg.str());
  }
}

}  // namespace curvature_detail

/// Riemann tensor of blockdiag(H, H) at the tube point with coordinate x
/// (the metric does not depend on y, so y is taken as 0).
template <RadialPotential P>
RiemannTensor riemann_at(const P& profile, const Eigen::VectorXd& x, double h) {
  curvature_detail::check_stencil(profile, x, h);
  const Eigen::Index n = x.size();
  auto metric = [&](const Eigen::VectorXd& q) {
    const Eigen::VectorXd xs = q.head(n);
    return metric_matrix(geometry_detail::hessian_at_radius(profile, xs, xs.norm()));
  };
  Eigen::VectorXd q = Eigen::VectorXd::Zero(2 * n);
  q.head(n) = x;
  return riemann_fd(metric, q, h);
}

template <RadialPotential P>
double sectional_curvature(const P& profile, const SpatialPoint& pt,
                           const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                           double h) {
  const Eigen::Index dim = 2 * pt.x.size();
  if (u.size() != dim || v.size() != dim)
    throw Error(ErrorCode::invalid_params, "plane vectors must have dimension 2n");
  return sectional_curvature(riemann_at(profile, pt.x, h), u, v);
}

struct HistogramConfig {
  double lo = -2.0;
  double hi = 2.0;
  int bins = 40;
};

struct CurvatureSample {
  std::size_t point_index;
  double radius;
  Eigen::VectorXd x;
  Eigen::VectorXd e1;  // G-orthonormal plane basis (empty on failure)
  Eigen::VectorXd e2;
  double K;            // NaN on failure
  std::string status;  // "ok" or an error code name
};

struct ScanSummary {
  std::size_t ok = 0;
  std::size_t failed = 0;
  double min = std::numeric_limits<double>::quiet_NaN();
  double max = std::numeric_limits<double>::quiet_NaN();
  std::size_t argmin = 0;  // sample indices
  std::size_t argmax = 0;
  std::vector<double> edges;
  std::vector<std::size_t> counts;
  std::size_t underflow = 0;
  std::size_t overflow = 0;
};

struct CurvatureScan {
  std::uint64_t seed;
  double h;
  HistogramConfig histogram;
  std::vector<CurvatureSample> samples;
  ScanSummary summary;
};

inline ScanSummary summarize(const std::vector<CurvatureSample>& samples,
                             const HistogramConfig& cfg) {
  if (!(cfg.hi > cfg.lo) || cfg.bins < 1)
    throw Error(ErrorCode::invalid_params, "histogram needs hi > lo and bins >= 1");
  ScanSummary s;
  s.edges.resize(static_cast<std::size_t>(cfg.bins) + 1);
  for (int i = 0; i <= cfg.bins; ++i)
    s.edges[i] = cfg.lo + (cfg.hi - cfg.lo) * i / cfg.bins;
  s.counts.assign(static_cast<std::size_t>(cfg.bins), 0);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& smp = samples[i];
    if (smp.status != "ok") {
      ++s.failed;
      continue;
    }
    if (s.ok == 0 || smp.K < s.min) {
      s.min = smp.K;
      s.argmin = i;
    }
    if (s.ok == 0 || smp.K > s.max) {
      s.max = smp.K;
      s.argmax = i;
    }
    ++s.ok;
    if (smp.K < cfg.lo) {
      ++s.underflow;
    } else if (smp.K > cfg.hi) {
      ++s.overflow;
    } else {
      auto bin = static_cast<std::size_t>((smp.K - cfg.lo) / (cfg.hi - cfg.lo) * cfg.bins);
      s.counts[std::min(bin, s.counts.size() - 1)]++;
    }
  }
  return s;
}

/// Seeded scan: one random direction per radius, planes_per_point random
/// planes at each point. Per-sample failures are recorded, not thrown.
template <RadialPotential P>
CurvatureScan curvature_scan(const P& profile, const std::vector<double>& radii,
                             int planes_per_point, std::uint64_t seed, double h,
                             const HistogramConfig& histogram = {}) {
  if (planes_per_point < 1)
    throw Error(ErrorCode::invalid_params, "planes_per_point must be at least 1");
  for (double r : radii) {
    if (!(r >= 0.0) || !(r < 0.9 * profile.r_max())) {
      std::ostringstream msg;
      msg << "scan radius " << r << " must lie in [0, 0.9 r_max = "
          << 0.9 * profile.r_max() << ")";
      throw Error(ErrorCode::invalid_params, msg.str());
    }
  }
  const Eigen::Index n = profile.n();
  Sampler sampler(seed);
  CurvatureScan scan{seed, h, histogram, {}, {}};
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const Eigen::VectorXd x = radii[k] * sampler.unit_vector(n);
    std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> planes;
    for (int j = 0; j < planes_per_point; ++j) {
      Eigen::VectorXd u = sampler.normal_vector(2 * n);
      Eigen::VectorXd v = sampler.normal_vector(2 * n);
      planes.emplace_back(std::move(u), std::move(v));
    }
    std::optional<RiemannTensor> riemann;
    std::string point_status = "ok";
    try {
      riemann = riemann_at(profile, x, h);
    } catch (const Error& e) {
      point_status = std::string(to_string(e.code()));
    }
    for (const auto& [u, v] : planes) {
      CurvatureSample smp{k, radii[k], x, {}, {},
                          std::numeric_limits<double>::quiet_NaN(), point_status};
      if (riemann) {
        try {
          auto [e1, e2] = orthonormal_plane(riemann->G, u, v);
          smp.K = sectional_curvature(*riemann, e1, e2);
          smp.e1 = std::move(e1);
          smp.e2 = std::move(e2);
          if (!std::isfinite(smp.K)) smp.status = "numerical_failure";
        } catch (const Error& e) {
          smp.status = std::string(to_string(e.code()));
        }
      }
      scan.samples.push_back(std::move(smp));
    }
  }
  scan.summary = summarize(scan.samples, histogram);
  return scan;
}

/// K along the ray x = r e_1 for three fixed plane families: the complex
/// line of the radial direction (dx1, dy1), the radial-tangential real plane
/// (dx1, dx2), and the complex line of a tangential direction (dx2, dy2).
struct RadialCurvatureRow {
  double r;
  double radial_complex;
  double radial_tangential;
  double tangential_complex;
};

template <RadialPotential P>
std::vector<RadialCurvatureRow> radial_curvature_profile(
    const P& profile, const std::vector<double>& radii, double h) {
  const Eigen::Index n = profile.n();
  const Eigen::Index dim = 2 * n;
  auto basis = [dim](Eigen::Index i) {
    return Eigen::VectorXd::Unit(dim, i);
  };
  std::vector<RadialCurvatureRow> rows;
  rows.reserve(radii.size());
  for (double r : radii) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    x(0) = r;
    const RiemannTensor R = riemann_at(profile, x, h);
    rows.push_back({r, sectional_curvature(R, basis(0), basis(n)),
                    sectional_curvature(R, basis(0), basis(1)),
                    sectional_curvature(R, basis(1), basis(n + 1))});
  }
  return rows;
}

}  // namespace calabi

#endif  // CALABI_CURVATURE_HPP
