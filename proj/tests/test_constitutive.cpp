#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "avflow/constitutive.hpp"
#include "oracles.hpp"

using namespace avflow;

namespace {

ModelParams academic() { return ModelParams{}; }

ModelParams traffic() {
  ModelParams p;
  p.n = 4500;
  p.a = 0.2411;
  p.b = 28.0 / 102.0;
  p.R = 180.0 / 31.0;
  p.sigma = 30.0;
  p.c = 40.0;
  return p;
}

std::vector<double> speed_grid(double b) {
  std::vector<double> ws;
  for (int k = 1; k < 40; ++k) ws.push_back(-1.0 + (1.0 + b) * k / 40.0);
  for (double w : {-0.999, -0.5, -1e-3, -1e-8, 1e-8, 1e-3, 0.999 * b}) ws.push_back(w);
  return ws;
}

std::vector<double> density_grid(double R) {
  std::vector<double> rs;
  for (int k = 1; k < 60; ++k) rs.push_back(1.0 + (R - 1.0) * k / 60.0);
  for (double e : {1e-6, 1e-3, 0.05, 0.0999, 0.1001}) rs.push_back(1.0 + e * std::min(1.0, R - 1.0));
  return rs;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST(Speed, QMatchesDefinition) {
  for (const auto& p : {academic(), traffic()}) {
    const Model m(p);
    for (double w : speed_grid(p.b)) EXPECT_LT(rel(m.q(w), oracle::q(w, p.b)), 1e-13) << w;
  }
}

TEST(Speed, QAtZero) {
  const Model m(academic());
  const double b = academic().b;
  EXPECT_NEAR(m.q(0.0), (1.0 + b) * (1.0 + b) / b, 1e-12);
}

TEST(Speed, BetaIsIntegralOfQ) {
  for (const auto& p : {academic(), traffic()}) {
    const Model m(p);
    for (double w : speed_grid(p.b)) {
      if (std::abs(w) < 1e-6) continue;
      EXPECT_LT(rel(m.beta(w), oracle::beta(w, p.b)), 1e-10) << w;
    }
  }
}

TEST(Speed, QIsDerivativeOfBeta) {
  for (const auto& p : {academic(), traffic()}) {
    const Model m(p);
    for (double w : speed_grid(p.b)) {
      const double h = 1e-6 * std::min({1.0, w + 1.0, p.b - w});
      const double fd = (m.beta(w + h) - m.beta(w - h)) / (2.0 * h);
      EXPECT_LT(rel(fd, m.q(w)), 1e-5) << w;
    }
  }
}

TEST(Speed, BetaInverseRoundTrip) {
  for (const auto& p : {academic(), traffic()}) {
    const Model m(p);
    for (double w : speed_grid(p.b)) EXPECT_LT(std::abs(m.beta_inv(m.beta(w)) - w), 1e-10) << w;
  }
}

TEST(Speed, BetaInverseDenseSweep) {
  // converged Newton steps that round onto a bracket end once returned the
  // bisection midpoint
  for (const auto& p : {academic(), traffic()}) {
    const Model m(p);
    double worst = 0.0;
    for (int k = -2000; k <= 2000; ++k) {
      const double y = 0.005 * k;
      worst = std::max(worst, std::abs(m.beta(m.beta_inv(y)) - y) / std::max(1.0, std::abs(y)));
    }
    EXPECT_LT(worst, 1e-13);
  }
}

TEST(Speed, BetaInverseTinyArguments) {
  // denormal inputs used to derail the Newton start
  const Model m(academic());
  for (double y : {5e-324, -5e-324, 2e-308, -2.9e-308, 1e-200, -1e-120, 1e-90}) {
    const double w = m.beta_inv(y);
    EXPECT_LT(std::abs(w), 1e-80) << y;
    EXPECT_EQ(std::signbit(w), std::signbit(y)) << y;
  }
  EXPECT_EQ(m.beta_inv(0.0), 0.0);
}

TEST(Speed, BetaInverseLargeArguments) {
  // beta maps (-1, b) onto the whole line
  const Model m(academic());
  const double b = academic().b;
  for (double y : {1e3, 1e6, -1e3, -1e6}) {
    const double w = m.beta_inv(y);
    EXPECT_GT(w, -1.0);
    EXPECT_LT(w, b);
    // near the ends one ulp of w moves beta by ulp * q(w)
    const double ulp = std::nextafter(w, 1.0) - w;
    EXPECT_LT(std::abs(m.beta(w) - y), 64.0 * ulp * m.q(w) + 1e-13 * std::abs(y)) << y;
  }
  EXPECT_THROW(m.beta_inv(std::nan("")), DomainError);
  EXPECT_THROW(m.beta_inv(HUGE_VAL), DomainError);
}

TEST(Speed, HIsIntegralOfSQ) {
  for (const auto& p : {academic(), traffic()}) {
    const Model m(p);
    for (double w : speed_grid(p.b)) {
      if (std::abs(w) < 1e-6) continue;
      EXPECT_LT(rel(m.H(w), oracle::H(w, p.b)), 1e-9) << w;
    }
  }
}

TEST(Speed, DomainChecks) {
  const Model m(academic());
  EXPECT_THROW(m.beta(-1.0), DomainError);
  EXPECT_THROW(m.q(academic().b), DomainError);
  EXPECT_THROW(m.H(1.0), DomainError);
}

TEST(Density, KappaVanishesBelowInteraction) {
  const Model m(academic());
  for (double r : {1e-9, 0.3, 1.0}) {
    EXPECT_EQ(m.kappa(r), 0.0);
    EXPECT_EQ(m.P(r), 0.0);
    EXPECT_EQ(m.Q(r), 0.0);
  }
}

TEST(Density, KappaFormula) {
  const Model m(traffic());
  const auto p = traffic();
  for (double r : density_grid(p.R)) EXPECT_LT(rel(m.kappa(r), oracle::kappa(r, p.R, p.c)), 1e-14);
}

TEST(Density, PressureIsIntegralOfKappa) {
  for (const auto& p : {academic(), traffic()}) {
    const Model m(p);
    for (double r : density_grid(p.R)) {
      EXPECT_LT(rel(m.P(r), oracle::P(r, p.R, p.sigma, p.c)), 1e-9) << r;
    }
  }
}

TEST(Density, QMatchesDefinition) {
  for (const auto& p : {academic(), traffic()}) {
    const Model m(p);
    for (double r : density_grid(p.R)) {
      if (r - 1.0 < 1e-5) continue;  // both sides ~ eps^4, relative error meaningless
      EXPECT_LT(rel(m.Q(r), oracle::Q(r, p.R, p.sigma, p.c)), 1e-8) << r;
    }
  }
}

TEST(Density, SeriesAndClosedFormAgreeAtSwitch) {
  // The series branch covers eps <= 0.1 min(1, R-1); both sides must meet.
  for (const auto& p : {academic(), traffic()}) {
    const Model m(p);
    const double e0 = 0.1 * std::min(1.0, p.R - 1.0);
    const double below = m.P(1.0 + e0 * (1.0 - 1e-12));
    const double above = m.P(1.0 + e0 * (1.0 + 1e-12));
    EXPECT_LT(rel(below, above), 1e-9);
    EXPECT_LT(rel(m.Q(1.0 + e0 * (1.0 - 1e-12)), m.Q(1.0 + e0 * (1.0 + 1e-12))), 1e-9);
  }
}

TEST(Density, MonotonePressure) {
  const Model m(traffic());
  double prev = 0.0;
  for (double r : {1.01, 1.5, 2.0, 3.0, 4.0, 5.0, 5.8}) {
    const double v = m.P(r);
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(Spacing, PhiSecondDerivativeIsSigmaOverAK) {
  for (const auto& p : {academic(), traffic()}) {
    const Model m(p);
    const double smin = 1.0 / p.R;
    double worst = 0.0;
    for (int k = 1; k < 200; ++k) {
      const double s = smin + (1.0 - smin) * k / 200.0;
      const double h = 1e-4 * std::min(s - smin, 1.0 - s);
      if (h <= 0.0) continue;
      const double fd = (m.Phi(s + h) - 2.0 * m.Phi(s) + m.Phi(s - h)) / (h * h);
      const double ref = p.sigma / p.a * m.K(s);
      if (ref < 1e-8) continue;  // Phi'' ~ (1-s)^2: the FD quotient loses all digits
      worst = std::max(worst, rel(fd, ref));
    }
    EXPECT_LT(worst, 1e-4);
  }
}

TEST(Spacing, PhiPrimeIsDerivativeOfPhi) {
  const auto p = traffic();
  const Model m(p);
  for (double s : {0.2, 0.3, 0.5, 0.8, 0.95}) {
    const double h = 1e-6;
    const double fd = (m.Phi(s + h) - m.Phi(s - h)) / (2.0 * h);
    EXPECT_LT(rel(fd, m.Phi_prime(s)), 1e-6) << s;
  }
  EXPECT_EQ(m.Phi(1.0), 0.0);
  EXPECT_EQ(m.Phi_prime(1.5), 0.0);
}

TEST(Spacing, DomainChecks) {
  const Model m(academic());
  EXPECT_THROW(m.K(1.0 / academic().R), DomainError);
  EXPECT_THROW(m.Phi(0.1), DomainError);
}

TEST(Dimensional, TrafficConstants) {
  DimensionalParams d;
  d.v_star = 102.0;
  d.rho_bar = 31.0;
  d.rho_max = 180.0;
  d.v_max = 130.0;
  d.sigma_tilde = 3060.0;
  EXPECT_NEAR(d.b(), 0.2745, 5e-5);
  EXPECT_NEAR(d.R(), 5.806, 5e-4);
  EXPECT_DOUBLE_EQ(d.sigma(), 30.0);
}

TEST(Dimensional, AcademicConstants) {
  const DimensionalParams d;
  EXPECT_NEAR(d.b(), 0.0606, 1e-4);
  EXPECT_NEAR(d.R(), 1.9, 1e-5);
  EXPECT_DOUBLE_EQ(d.sigma(), 30.0);
}

TEST(Dimensional, ScalingOfBetaAndPressure) {
  DimensionalParams d;
  const DimensionalModel dm(d, 225, 0.4653);
  const Model& m = dm.model();
  for (double v : {20.0, 30.0, 34.0}) EXPECT_NEAR(dm.beta(v), d.v_star * m.beta(v / d.v_star - 1.0), 1e-12);
  EXPECT_NEAR(dm.P(100.0), d.v_star * d.v_star * d.rho_bar * m.P(100.0 / d.rho_bar), 1e-9);
  EXPECT_NEAR(dm.to_x(dm.to_xi(0.7, 2.0), dm.to_tau(2.0)), 0.7, 1e-14);
}

TEST(Params, Validation) {
  ModelParams p;
  p.R = 0.9;
  EXPECT_THROW(p.validate(), ConfigError);
  p = ModelParams{};
  p.n = 2;
  EXPECT_THROW(Model{p}, ConfigError);
}
