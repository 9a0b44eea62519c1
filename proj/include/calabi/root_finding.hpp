#ifndef CALABI_ROOT_FINDING_HPP
#define CALABI_ROOT_FINDING_HPP

#include <cmath>
#include <utility>

namespace calabi {

struct RootResult {
  double x;
  int iterations;
  bool converged;
};

/// Newton's method kept inside a sign-changing bracket, falling back to
/// bisection whenever the Newton step leaves the bracket or fails to halve
/// the previous step. fdf(x) returns {f(x), f'(x)}.
template <class FnWithDerivative>
RootResult safeguarded_newton(FnWithDerivative&& fdf, double lo, double hi,
                              double x_tol, int max_iter = 100) {
  auto [f_lo, d_lo] = fdf(lo);
  auto [f_hi, d_hi] = fdf(hi);
  (void)d_lo;
  (void)d_hi;
  if (f_lo == 0.0) return {lo, 0, true};
  if (f_hi == 0.0) return {hi, 0, true};
  if ((f_lo > 0.0) == (f_hi > 0.0)) return {0.5 * (lo + hi), 0, false};

  // Orient so that f(neg) < 0 < f(pos).
  double neg = f_lo < 0.0 ? lo : hi;
  double pos = f_lo < 0.0 ? hi : lo;
  double x = 0.5 * (lo + hi);
  double dx_old = std::abs(hi - lo);
  double dx = dx_old;
  auto [f, df] = fdf(x);

  for (int it = 1; it <= max_iter; ++it) {
    const bool newton_leaves = ((x - pos) * df - f) * ((x - neg) * df - f) > 0.0;
    const bool too_slow = std::abs(2.0 * f) > std::abs(dx_old * df);
    if (newton_leaves || too_slow || df == 0.0) {
      dx_old = dx;
      dx = 0.5 * (pos - neg);
      x = neg + dx;
    } else {
      dx_old = dx;
      dx = f / df;
      x -= dx;
    }
    if (std::abs(dx) <= x_tol) return {x, it, true};
    std::tie(f, df) = fdf(x);
    if (f == 0.0) return {x, it, true};
    if (f < 0.0) {
      neg = x;
    } else {
      pos = x;
    }
  }
  return {x, max_iter, false};
}

}  // namespace calabi

#endif  // CALABI_ROOT_FINDING_HPP
