#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "avflow/reduced.hpp"
#include "avflow/scenario.hpp"

using namespace avflow;

namespace {

ReducedState academic_init(const ReducedScheme& rs) {
  return rs.init(academic_example().density_dimensionless());
}

double max_of(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

}  // namespace

TEST(Reduced, FaceSpeedVanishesAtLowDensity) {
  const ReducedScheme rs(Model(ModelParams{}), ReducedConfig{});
  EXPECT_EQ(rs.face_speed(0.2, 0.9, 0.01), 0.0);
  EXPECT_EQ(rs.face_speed(1.0, 1.0, 0.01), 0.0);
  EXPECT_EQ(rs.face_speed(0.5, 1.5, 0.01), 0.0);  // mean exactly 1
  EXPECT_EQ(rs.flux(0.0, 0.4, 0.01), 0.0);
}

TEST(Reduced, FluxRunsDownTheGradient) {
  const ReducedScheme rs(Model(ModelParams{}), ReducedConfig{});
  EXPECT_LT(rs.face_speed(1.2, 1.4, 0.01), 0.0);  // denser on the right: move left
  EXPECT_GT(rs.face_speed(1.4, 1.2, 0.01), 0.0);
  EXPECT_EQ(rs.face_speed(1.3, 1.3, 0.01), 0.0);
}

TEST(Reduced, ReversedGradientNegatesBeta) {
  // beta is not odd, so the speeds differ while beta of them cancels
  const Model m(ModelParams{});
  const ReducedScheme rs(m, ReducedConfig{});
  EXPECT_NEAR(m.beta(rs.face_speed(1.4, 1.2, 0.01)), -m.beta(rs.face_speed(1.2, 1.4, 0.01)), 1e-12);
}

TEST(Reduced, FaceSpeedMatchesInverseBeta) {
  const Model m(ModelParams{});
  const ReducedScheme rs(m, ReducedConfig{});
  const double rl = 1.25, rr = 1.35, dx = 0.02;
  const double rf = 0.5 * (rl + rr);
  EXPECT_DOUBLE_EQ(rs.face_speed(rl, rr, dx), m.beta_inv(-m.kappa(rf) * (rr - rl) / (rf * dx)));
}

TEST(Reduced, FaceDensityAtRThrows) {
  const ReducedScheme rs(Model(ModelParams{}), ReducedConfig{});
  EXPECT_THROW(rs.face_speed(1.9, 1.9, 0.01), DomainError);
}

TEST(Reduced, MassConservedEveryStep) {
  const ReducedScheme rs(Model(ModelParams{}), ReducedConfig{});
  auto s = academic_init(rs);
  const double m0 = s.mass();
  double prev = m0;
  for (int k = 0; k < 500; ++k) {
    rs.step(s);
    ASSERT_LT(std::abs(s.mass() - prev), 1e-12 * m0) << k;
    prev = s.mass();
  }
}

TEST(Reduced, MaxDensityNeverGrows) {
  const ReducedScheme rs(Model(ModelParams{}), ReducedConfig{});
  auto s = academic_init(rs);
  const double initial = max_of(s.rho);
  double prev = initial;
  for (int k = 0; k < 500; ++k) {
    rs.step(s);
    const double mx = max_of(s.rho);
    ASSERT_LE(mx, prev * (1.0 + 1e-12)) << k;
    prev = mx;
  }
  EXPECT_LT(prev, initial);
}

TEST(Reduced, IndependentOfSigma) {
  ModelParams lo{}, hi{};
  lo.sigma = 10.0;
  hi.sigma = 60.0;
  const ReducedScheme a(Model(lo), ReducedConfig{});
  const ReducedScheme b(Model(hi), ReducedConfig{});
  auto sa = academic_init(a);
  auto sb = academic_init(b);
  for (int k = 0; k < 200; ++k) {
    a.step(sa);
    b.step(sb);
  }
  EXPECT_EQ(sa.rho, sb.rho);
}

TEST(Reduced, SubcriticalDensityIsFrozen) {
  const ReducedScheme rs(Model(ModelParams{}), ReducedConfig{});
  ReducedState s;
  s.dx = 0.02;
  s.rho.assign(30, 0.0);
  for (std::size_t j = 5; j < 25; ++j) s.rho[j] = 0.3 + 0.02 * static_cast<double>(j);  // max 0.78
  const auto before = s.rho;
  for (int k = 0; k < 20; ++k) rs.step(s);
  EXPECT_EQ(s.rho, before);
}

TEST(Reduced, TooLargeStepIsRejected) {
  ReducedConfig cfg;
  cfg.dt = 1.0;
  const ReducedScheme rs(Model(ModelParams{}), cfg);
  auto s = academic_init(rs);
  EXPECT_ANY_THROW(for (int k = 0; k < 100; ++k) rs.step(s));
}

TEST(Reduced, RunLandsOnOutputs) {
  const ReducedScheme rs(Model(ModelParams{}), ReducedConfig{});
  auto s = academic_init(rs);
  const std::vector<double> outs = {0.0, 0.02, 0.1};
  std::vector<double> hit;
  rs.run(s, 0.1, outs, [&](const ReducedState& st, bool out) {
    if (out) hit.push_back(st.t);
  });
  EXPECT_EQ(hit, outs);
  const auto g = rs.profile(s);
  EXPECT_NO_THROW(g.validate());
}
