#ifndef CALABI_HERMITE_HPP
#define CALABI_HERMITE_HPP

#include <array>
#include <cstddef>

namespace calabi {

/// Value and first three derivatives of a function at one end of an interval.
struct Jet3 {
  double f, d1, d2, d3;
};

/// Degree-7 polynomial in the local coordinate theta = (r - r_left) / width,
/// stored in the monomial basis.
using SepticCoeffs = std::array<double, 8>;

/// Two-point Hermite interpolant matching f, f', f'', f''' at both ends.
inline SepticCoeffs hermite_septic(const Jet3& left, const Jet3& right,
                                   double width) {
  const double h = width;
  const double h2 = h * h;
  const double h3 = h2 * h;

  SepticCoeffs c{};
  c[0] = left.f;
  c[1] = h * left.d1;
  c[2] = 0.5 * h2 * left.d2;
  c[3] = h3 * left.d3 / 6.0;

  // Mismatch of the cubic Taylor part at theta = 1 for each derivative order.
  const double r0 = right.f - (c[0] + c[1] + c[2] + c[3]);
  const double r1 = h * right.d1 - (c[1] + 2.0 * c[2] + 3.0 * c[3]);
  const double r2 = h2 * right.d2 - (2.0 * c[2] + 6.0 * c[3]);
  const double r3 = h3 * right.d3 - 6.0 * c[3];

  c[4] = 35.0 * r0 - 15.0 * r1 + 2.5 * r2 - r3 / 6.0;
  c[5] = -84.0 * r0 + 39.0 * r1 - 7.0 * r2 + 0.5 * r3;
  c[6] = 70.0 * r0 - 34.0 * r1 + 6.5 * r2 - 0.5 * r3;
  c[7] = -20.0 * r0 + 10.0 * r1 - 2.0 * r2 + r3 / 6.0;
  return c;
}

/// Value and first two derivatives at one end of an interval.
struct Jet2 {
  double f, d1, d2;
};

using QuinticCoeffs = std::array<double, 6>;

/// Two-point Hermite interpolant matching f, f', f'' at both ends.
inline QuinticCoeffs hermite_quintic(const Jet2& left, const Jet2& right,
                                     double width) {
  const double h = width;
  const double h2 = h * h;

  QuinticCoeffs c{};
  c[0] = left.f;
  c[1] = h * left.d1;
  c[2] = 0.5 * h2 * left.d2;

  const double r0 = right.f - (c[0] + c[1] + c[2]);
  const double r1 = h * right.d1 - (c[1] + 2.0 * c[2]);
  const double r2 = h2 * right.d2 - 2.0 * c[2];

  c[3] = 10.0 * r0 - 4.0 * r1 + 0.5 * r2;
  c[4] = -15.0 * r0 + 7.0 * r1 - r2;
  c[5] = 6.0 * r0 - 3.0 * r1 + 0.5 * r2;
  return c;
}

/// Polynomial and its first two theta-derivatives at theta.
struct PolyValue {
  double p, dp, d2p;
};

template <std::size_t N>
PolyValue evaluate_poly(const std::array<double, N>& c, double theta) {
  constexpr int top = static_cast<int>(N) - 1;
  double p = c[top];
  double dp = top * c[top];
  double d2p = top * (top - 1) * c[top];
  for (int k = top - 1; k >= 0; --k) {
    p = p * theta + c[k];
    if (k >= 1) dp = dp * theta + k * c[k];
    if (k >= 2) d2p = d2p * theta + k * (k - 1) * c[k];
  }
  return {p, dp, d2p};
}

}  // namespace calabi

#endif  // CALABI_HERMITE_HPP
