#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "conelab/profile.hpp"
#include "oracles.hpp"

using namespace conelab;

TEST(Profile, ExactCone) {
  const auto p = ProfileFunction::exact_cone(0.5);
  EXPECT_EQ(p.phi(2.0), 1.0);
  EXPECT_EQ(p.dphi(0.3), 0.5);
  EXPECT_EQ(p.ddphi(0.3), 0.0);
  EXPECT_EQ(p.log_slope(0.3), 1.0);
  EXPECT_EQ(p.inverse_ratio(0.3), 2.0);
  EXPECT_EQ(gauss_curvature(p, 0.3), 0.0);
  EXPECT_DOUBLE_EQ(p.integral(1.0), 0.25);
}

TEST(Profile, SmoothedShape) {
  const double beta = 2.0 / 3.0, eps = 0.01;
  const auto p = ProfileFunction::smoothed(beta, eps);
  EXPECT_NEAR(p.dphi(0.0), 1.0, 1e-15);
  EXPECT_NEAR(p.dphi(1.0), beta, 1e-15);
  EXPECT_NEAR(p.phi(1e-9) / 1e-9, 1.0, 1e-6);
  EXPECT_NEAR(p.phi(1.0), beta + (1.0 - beta) * eps, 1e-15);
  for (double r = 1e-6; r < 1.0; r *= 1.7) {
    EXPECT_GT(gauss_curvature(p, r), 0.0) << r;
    EXPECT_GT(p.phi(r), 0.0);
    EXPECT_LE(p.phi(r), r);
    EXPECT_GE(p.phi(r), beta * r);
    EXPECT_GE(p.log_slope(r), 0.0);
    EXPECT_LE(p.log_slope(r), 1.0 + 1e-15);
  }
  EXPECT_THROW(gauss_curvature(p, 0.0), domain_error);
}

TEST(Profile, DerivativesMatchFiniteDifferences) {
  const auto p = ProfileFunction::smoothed(0.4, 0.05);
  for (double r : {0.001, 0.02, 0.1, 0.7}) {
    const double h = 1e-5 * std::max(r, 0.01);
    EXPECT_NEAR(p.dphi(r), (p.phi(r + h) - p.phi(r - h)) / (2 * h), 1e-8);
    EXPECT_NEAR(p.ddphi(r), (p.dphi(r + h) - p.dphi(r - h)) / (2 * h), 1e-6 * std::abs(p.ddphi(r)) + 1e-8);
  }
}

TEST(Profile, IntegralMatchesQuadrature) {
  const auto p = ProfileFunction::smoothed(0.6, 0.03);
  const oracle::GaussLegendre gl(60);
  for (double R : {0.01, 0.2, 1.0}) {
    double q = 0.0;
    const int panels = 40;
    for (int j = 0; j < panels; ++j)
      q += gl.integrate([&](double r) { return p.phi(r); }, R * j / panels, R * (j + 1) / panels);
    EXPECT_NEAR(p.integral(R), q, 1e-14 * std::max(1.0, q));
  }
}

TEST(Profile, TotalCurvatureIsConeDeficit) {
  // Gauss-Bonnet: 2 pi int_0^R K phi dr = 2 pi (1 - phi'(R)) -> 2 pi (1 - beta).
  for (double beta : {0.3, 2.0 / 3.0, 0.9}) {
    const double eps = 0.02;
    const auto p = ProfileFunction::smoothed(beta, eps, 2.0);
    const double R = 2.0;
    const double total = 2.0 * std::numbers::pi *
                         oracle::graded_integral([&](double r) { return r > 0 ? gauss_curvature(p, r) * p.phi(r) : 0.0; }, R);
    EXPECT_NEAR(total, 2.0 * std::numbers::pi * (1.0 - p.dphi(R)), 1e-10);
    EXPECT_NEAR(total, 2.0 * std::numbers::pi * (1.0 - beta), 1e-10);
  }
}

TEST(Profile, SeriesMatchesDirectEvaluation) {
  const double beta = 0.55, eps = 0.1;
  const auto p = ProfileFunction::smoothed(beta, eps);
  const auto s = p.series(40);
  EXPECT_EQ(s.scale, eps);
  EXPECT_EQ(s.P[0], 1.0);
  EXPECT_EQ(s.Q[0], 1.0);
  for (double r : {1e-4, 0.005, 0.02, 0.05}) {
    const double x = r / eps;
    double P = 0.0, Q = 0.0, xn = 1.0;
    for (std::size_t n = 0; n < s.P.size(); ++n) {
      P += s.P[n] * xn;
      Q += s.Q[n] * xn;
      xn *= x;
    }
    EXPECT_NEAR(P, p.log_slope(r), 1e-12);
    EXPECT_NEAR(Q, std::pow(p.inverse_ratio(r), 2), 1e-12);
  }
  const auto c = ProfileFunction::exact_cone(0.5).series(5);
  EXPECT_EQ(c.P[0], 1.0);
  EXPECT_EQ(c.Q[0], 4.0);
  EXPECT_EQ(c.P[3], 0.0);
}

TEST(Profile, Validation) {
  EXPECT_THROW(ProfileFunction::exact_cone(0.0), domain_error);
  EXPECT_THROW(ProfileFunction::exact_cone(1.2), domain_error);
  EXPECT_THROW(ProfileFunction::smoothed(0.5, 0.0), domain_error);
  EXPECT_THROW(ProfileFunction::smoothed(0.5, 0.1, -1.0), domain_error);
  EXPECT_NO_THROW(ProfileFunction::smoothed(1.0, 0.1));
}
