#ifndef CALABI_DORMAND_PRINCE_HPP
#define CALABI_DORMAND_PRINCE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace calabi {

/// Dormand-Prince 5(4) embedded pair on fixed-size states.
///
/// Only the single-step kernel and the error norm live here; step-size
/// control and termination belong to the caller because the radial solver
/// stops on a state condition rather than at a fixed end point. The FSAL
/// derivative is returned so the caller can feed it into the next step.
template <std::size_t N>
struct DormandPrince54 {
  using State = std::array<double, N>;

  struct StepResult {
    State y;      // 5th-order solution
    State dy;     // derivative at the new point (FSAL)
    State error;  // difference between the 5th- and 4th-order solutions
  };

  static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0,
                          c5 = 8.0 / 9.0;

  static constexpr double a21 = 1.0 / 5.0;
  static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
  static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0,
                          a43 = 32.0 / 9.0;
  static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                          a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
  static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                          a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                          a65 = -5103.0 / 18656.0;
  static constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0,
                          a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                          a76 = 11.0 / 84.0;

  // b (5th order) minus b* (4th order)
  static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0,
                          e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                          e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

  template <class Rhs>
  static StepResult step(Rhs&& rhs, double t, const State& y, const State& k1,
                         double h) {
    State tmp{};
    auto stage = [&](auto&& combine) {
      for (std::size_t i = 0; i < N; ++i) tmp[i] = combine(i);
      return tmp;
    };

    const State k2 = rhs(t + c2 * h, stage([&](std::size_t i) {
                           return y[i] + h * a21 * k1[i];
                         }));
    const State k3 = rhs(t + c3 * h, stage([&](std::size_t i) {
                           return y[i] + h * (a31 * k1[i] + a32 * k2[i]);
                         }));
    const State k4 =
        rhs(t + c4 * h, stage([&](std::size_t i) {
              return y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
            }));
    const State k5 = rhs(t + c5 * h, stage([&](std::size_t i) {
                           return y[i] + h * (a51 * k1[i] + a52 * k2[i] +
                                              a53 * k3[i] + a54 * k4[i]);
                         }));
    const State k6 = rhs(t + h, stage([&](std::size_t i) {
                           return y[i] + h * (a61 * k1[i] + a62 * k2[i] +
                                              a63 * k3[i] + a64 * k4[i] +
                                              a65 * k5[i]);
                         }));

    StepResult out;
    for (std::size_t i = 0; i < N; ++i) {
      out.y[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] +
                             a75 * k5[i] + a76 * k6[i]);
    }
    out.dy = rhs(t + h, out.y);
    for (std::size_t i = 0; i < N; ++i) {
      out.error[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                          e6 * k6[i] + e7 * out.dy[i]);
    }
    return out;
  }

  /// RMS of the componentwise error scaled by atol + rtol * max(|y|, |y_new|).
  static double error_norm(const State& y, const State& y_new,
                           const State& error, double rtol, double atol) {
    double sum = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double scale =
          atol + rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
      const double q = error[i] / scale;
      sum += q * q;
    }
    return std::sqrt(sum / static_cast<double>(N));
  }
};

}  // namespace calabi

#endif  // CALABI_DORMAND_PRINCE_HPP
