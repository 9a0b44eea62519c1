#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "calabi/finite_difference.hpp"
#include "calabi/geometry.hpp"
#include "calabi/random.hpp"
#include "test_support.hpp"

using namespace calabi;
using calabi::testing::cached_profile;

namespace {

const std::vector<std::pair<int, double>> kConfigs{{2, -1.0}, {2, 0.0}, {2, 1.0}, {3, 0.0},
                                                   {4, 1.0}};

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::internal_consistency;
}

}  // namespace

TEST(Geometry, GradientMatchesFiniteDifferenceOfPotential) {
  for (auto [n, y0] : kConfigs) {
    const RadialProfile& p = cached_profile(n, y0);
    Sampler rng(3);
    for (int i = 0; i < 20; ++i) {
      const Eigen::VectorXd x = rng.in_ball(n, 0.8 * p.r_max());
      const double h = 1e-5 * p.r_max();
      Eigen::VectorXd fd(n);
      for (int k = 0; k < n; ++k) {
        Eigen::VectorXd a = x, b = x;
        a(k) += h;
        b(k) -= h;
        fd(k) = (potential(p, SpatialPoint{a}) - potential(p, SpatialPoint{b})) / (2 * h);
      }
      const Eigen::VectorXd g = grad_potential(p, SpatialPoint{x});
      EXPECT_LE((fd - g).cwiseAbs().maxCoeff(), 1e-7 * (1 + g.norm()));
    }
  }
}

TEST(Geometry, HessianMatchesFiniteDifferenceOfGradient) {
  for (auto [n, y0] : kConfigs) {
    const RadialProfile& p = cached_profile(n, y0);
    Sampler rng(5);
    for (int i = 0; i < 20; ++i) {
      const Eigen::VectorXd x = rng.in_ball(n, 0.6 * p.r_max());
      auto grad = [&](const Eigen::VectorXd& z) { return grad_potential(p, SpatialPoint{z}); };
      const Eigen::MatrixXd fd = fd::jacobian(grad, x, 1e-6 * p.r_max());
      const Eigen::MatrixXd H = hess_potential(p, SpatialPoint{x});
      EXPECT_LE((fd - H).cwiseAbs().maxCoeff(), 1e-7 * (1 + H.norm()));
    }
  }
}

TEST(Geometry, SpectrumIsRadialAndTangential) {
  for (auto [n, y0] : kConfigs) {
    const RadialProfile& p = cached_profile(n, y0);
    Sampler rng(9);
    for (int i = 0; i < 20; ++i) {
      const Eigen::VectorXd x = rng.in_ball(n, 0.9 * p.r_max());
      const double r = x.norm();
      const RadialState s = p.eval(r);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hess_potential(p, SpatialPoint{x}));
      std::vector<double> expected(static_cast<std::size_t>(n - 1), s.Yp / r);
      expected.push_back(s.Ypp);
      std::sort(expected.begin(), expected.end());
      for (int k = 0; k < n; ++k)
        EXPECT_NEAR(eig.eigenvalues()(k), expected[k], 1e-12 * expected.back());
      // The radial direction is the eigenvector of Y''.
      const Eigen::VectorXd u = x / r;
      const Eigen::VectorXd Hu = hess_potential(p, SpatialPoint{x}) * u;
      EXPECT_LE((Hu - s.Ypp * u).norm(), 1e-12 * s.Ypp);
    }
  }
}

TEST(Geometry, RotationalEquivariance) {
  for (auto [n, y0] : kConfigs) {
    const RadialProfile& p = cached_profile(n, y0);
    Sampler rng(13);
    for (int i = 0; i < 10; ++i) {
      const Eigen::MatrixXd Q = rng.orthogonal(n);
      const Eigen::VectorXd x = rng.in_ball(n, 0.9 * p.r_max());
      const Eigen::VectorXd Qx = Q * x;
      const Eigen::MatrixXd lhs = hess_potential(p, SpatialPoint{Qx});
      const Eigen::MatrixXd rhs = Q * hess_potential(p, SpatialPoint{x}) * Q.transpose();
      EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10 * (1 + lhs.norm()));
      EXPECT_NEAR(potential(p, SpatialPoint{Qx}), potential(p, SpatialPoint{x}),
                  1e-12 * (1 + std::abs(potential(p, SpatialPoint{x}))));
    }
  }
}

TEST(Geometry, OriginValues) {
  const RadialProfile& p = cached_profile(3, 1.0);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
  EXPECT_EQ(grad_potential(p, SpatialPoint{zero}), zero);
  const double b = std::exp(1.0 / 3.0);
  EXPECT_LE((hess_potential(p, SpatialPoint{zero}) - b * Eigen::MatrixXd::Identity(3, 3))
                .cwiseAbs()
                .maxCoeff(),
            1e-14);
}

TEST(Geometry, AssembledMatricesHaveExpectedStructure) {
  const RadialProfile& p = cached_profile(2, 0.0);
  Sampler rng(17);
  const Eigen::VectorXd x = rng.in_ball(2, 0.9 * p.r_max());
  const GeometryMatrices m = assemble(p, SpatialPoint{x});
  EXPECT_EQ((m.Omega + m.Omega.transpose()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ((m.G - m.G.transpose()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m.G).eigenvalues().minCoeff(), 0.0);
  // G is the metric of (Omega, J) with the standard complex structure.
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(4, 4);
  J.topRightCorner(2, 2) = -Eigen::MatrixXd::Identity(2, 2);
  J.bottomLeftCorner(2, 2) = Eigen::MatrixXd::Identity(2, 2);
  EXPECT_LE((m.Omega * J - m.G).cwiseAbs().maxCoeff(), 1e-14 * m.G.norm());
}

TEST(MongeAmpere, ResidualVanishesOnSolvedProfiles) {
  for (auto [n, y0] : kConfigs) {
    const RadialProfile& p = cached_profile(n, y0);
    Sampler rng(19);
    for (int i = 0; i < 50; ++i) {
      const Eigen::VectorXd x = rng.in_ball(n, 0.9 * p.r_max());
      EXPECT_LE(monge_ampere_residual(p, SpatialPoint{x}), 1e-6);
    }
  }
}

// Independent of the ODE identity: det H from the node values at a node
// radius, compared against e^Y.
TEST(MongeAmpere, DeterminantAtNodesFromStoredSlopes) {
  const RadialProfile& p = cached_profile(2, 0.0);
  for (std::size_t i = 1; i + 1 < p.size(); i += 50) {
    const double r = p.grid()[i];
    // Y'' by central differences of stored Y' across neighbouring nodes.
    const double hl = r - p.grid()[i - 1], hr = p.grid()[i + 1] - r;
    const double ypp = (p.Yp()[i + 1] * hl * hl - p.Yp()[i - 1] * hr * hr +
                        p.Yp()[i] * (hr * hr - hl * hl)) /
                       (hl * hr * (hl + hr));
    const double log_det = std::log(ypp) + std::log(p.Yp()[i] / r);
    EXPECT_NEAR(log_det, p.Y()[i], 1e-4 * (1 + std::abs(p.Y()[i])));
  }
}

TEST(MongeAmpere, QuarticControlFails) {
  const SyntheticPotential q = quartic_potential(2);
  const Eigen::Vector2d x(0.3, 0.4);
  EXPECT_GT(monge_ampere_residual(q, SpatialPoint{x}), 1e-2);
}

TEST(Einstein, ResidualConvergesAtSecondOrder) {
  for (auto [n, y0] : kConfigs) {
    const RadialProfile& p = cached_profile(n, y0);
    Sampler rng(23);
    for (int i = 0; i < 10; ++i) {
      const SpatialPoint pt{rng.in_ball(n, 0.6 * p.r_max())};
      const double h = 1e-2 * p.r_max();
      const double ratio = einstein_residual(p, pt, h) / einstein_residual(p, pt, h / 2);
      EXPECT_GE(ratio, 3.5);
      EXPECT_LE(ratio, 4.5);
    }
  }
}

TEST(Einstein, ControlsDoNotConverge) {
  // For Y = k r^2 the Ricci form vanishes but Omega does not.
  const SyntheticPotential flat = quadratic_potential(2, 0.5);
  const SpatialPoint pt{Eigen::Vector2d(0.1, 0.2)};
  EXPECT_NEAR(einstein_residual(flat, pt, 1e-2), 1.0, 1e-9);
  EXPECT_NEAR(einstein_residual(flat, pt, 5e-3), 1.0, 1e-9);
  const SyntheticPotential quartic = quartic_potential(2);
  EXPECT_GT(einstein_residual(quartic, pt, 1e-3), 1e-1);
}

TEST(Geometry, DomainErrors) {
  const RadialProfile& p = cached_profile(2, 0.0);
  const Eigen::Vector2d outside(p.r_max(), 0.0);
  EXPECT_EQ(code_of([&] { hess_potential(p, SpatialPoint{outside}); }),
            ErrorCode::outside_computed_domain);
  try {
    potential(p, SpatialPoint{Eigen::Vector2d(p.a_est() + 1, 0.0)});
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("a_est"), std::string::npos);
  }
  EXPECT_EQ(code_of([&] { potential(p, SpatialPoint{Eigen::Vector3d(0.1, 0.1, 0.1)}); }),
            ErrorCode::invalid_params);
  const SpatialPoint inside{Eigen::Vector2d(0.5, 0.0)};
  EXPECT_EQ(code_of([&] { einstein_residual(p, inside, 0.0); }), ErrorCode::invalid_step);
  EXPECT_EQ(code_of([&] { einstein_residual(p, inside, p.r_max()); }),
            ErrorCode::stencil_out_of_domain);
}
