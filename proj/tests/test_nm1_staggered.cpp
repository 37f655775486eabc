#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "avflow/nm1_staggered.hpp"
#include "avflow/scenario.hpp"

using namespace avflow;

namespace {

struct Academic {
  Scenario sc = academic_example();
  Model m{sc.model};
  StaggeredScheme scheme{m, sc.nm1};
  StaggeredState init() const { return scheme.init(sc.density_dimensionless(), sc.speed_dimensionless()); }
};

// Plateau of density rho0 with uniform speed w0 on 40 cells, vacuum around.
StaggeredState plateau(double dx, double rho0, double w0) {
  StaggeredState s;
  s.dx = dx;
  s.rho.assign(60, 0.0);
  s.w.assign(61, 0.0);
  for (std::size_t j = 10; j < 50; ++j) s.rho[j] = rho0;
  for (std::size_t j = 10; j <= 50; ++j) s.w[j] = w0;
  return s;
}

}  // namespace

TEST(Nm1, InteriorFrictionIsImplicitEuler) {
  // below rho = 1 there is no pressure or viscosity; a uniform interior
  // only feels friction, beta(w_new) = beta(w) / (1 + sigma dt)
  const Model m(ModelParams{});
  Nm1Config cfg;
  cfg.dt = 0.002;
  cfg.dx = 0.02;
  const StaggeredScheme scheme(m, cfg);
  auto s = plateau(cfg.dx, 0.6, 0.03);
  scheme.step(s);
  const double ref = m.beta_inv(m.beta(0.03) / (1.0 + m.params().sigma * cfg.dt));
  for (std::size_t j = 14; j <= 46; ++j) EXPECT_NEAR(s.w[j], ref, 1e-14) << j;
  EXPECT_EQ(s.k, 1u);
}

TEST(Nm1, VacuumFacesHaveZeroSpeed) {
  const Model m(ModelParams{});
  Nm1Config cfg;
  const StaggeredScheme scheme(m, cfg);
  auto s = plateau(cfg.dx, 0.6, -0.02);
  scheme.step(s);
  for (std::size_t j = 0; j < s.rho.size(); ++j) {
    const bool left_vac = j == 0 || s.rho[j - 1] == 0.0;
    if (left_vac && s.rho[j] == 0.0) EXPECT_EQ(s.w[j], 0.0) << j;
  }
}

TEST(Nm1, MassConservedEveryStep) {
  Academic a;
  auto s = a.init();
  const double m0 = s.mass();
  double prev = m0;
  for (int k = 0; k < 400; ++k) {
    a.scheme.step(s);
    const double m = s.mass();
    ASSERT_LT(std::abs(m - prev), 1e-12 * m0) << k;
    prev = m;
  }
  EXPECT_LT(std::abs(prev - m0), 1e-12 * m0);
}

TEST(Nm1, LongRunStaysBoundedAfterFrictionDecay) {
  // friction drives vacuum-adjacent face speeds into denormals; they must
  // not come back as spurious O(1) speeds
  Academic a;
  auto s = a.init();
  for (int k = 0; k < 1300; ++k) a.scheme.step(s);
  double wmax = 0.0;
  for (double v : s.w) {
    ASSERT_TRUE(std::isfinite(v));
    wmax = std::max(wmax, std::abs(v));
  }
  EXPECT_LT(wmax, 0.05);
  const auto g = a.scheme.profile(s);
  EXPECT_GT(g.support_lo, -0.7);
  EXPECT_LT(g.support_hi, 2.7);
}

TEST(Nm1, CflViolationThrows) {
  const Model m(ModelParams{});
  Nm1Config cfg;
  cfg.dt = 5.0;  // |w| dt / dx far above 1
  cfg.dx = 0.01;
  const StaggeredScheme scheme(m, cfg);
  auto s = plateau(cfg.dx, 0.6, 0.05);
  EXPECT_THROW(scheme.step(s), StateSpaceError);
}

TEST(Nm1, PaddingFollowsTheSupport) {
  Academic a;
  auto s = a.init();
  const std::size_t guard = a.sc.nm1.pad / 2;
  for (int k = 0; k < 300; ++k) {
    a.scheme.step(s);
    std::size_t first = s.rho.size(), last = 0;
    for (std::size_t j = 0; j < s.rho.size(); ++j) {
      if (s.rho[j] > 0.0) {
        first = std::min(first, j);
        last = j;
      }
    }
    ASSERT_GE(first, guard);
    ASSERT_LT(last + guard, s.rho.size());
    ASSERT_EQ(s.w.size(), s.rho.size() + 1);
  }
}

TEST(Nm1, RunLandsOnOutputs) {
  Academic a;
  auto s = a.init();
  const std::vector<double> outs = {0.0, 0.05, 0.1001, 0.2};
  std::vector<double> hit;
  a.scheme.run(s, 0.2, outs, [&](const StaggeredState& st, bool out) {
    if (out) hit.push_back(st.t);
  });
  EXPECT_EQ(hit, outs);
}

TEST(Nm1, InitialCellAveragesCarryProfileMass) {
  Academic a;
  const auto s = a.init();
  EXPECT_NEAR(s.mass(), a.sc.density_dimensionless().mass(), 1e-12);
  const auto g = a.scheme.profile(s);
  EXPECT_NO_THROW(g.validate());
  EXPECT_LE(g.support_lo, -0.52 + a.sc.nm1.dx);
  EXPECT_GE(g.support_hi, 2.52 - a.sc.nm1.dx);
}

TEST(Nm1, ConfigValidation) {
  Nm1Config c;
  c.dx = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = Nm1Config{};
  c.pad = 2;
  EXPECT_THROW(c.validate(), ConfigError);
}
