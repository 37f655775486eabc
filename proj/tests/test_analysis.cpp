#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "avflow/analysis.hpp"
#include "avflow/runner.hpp"
#include "avflow/scenario.hpp"

using namespace avflow;

namespace {

// Uniform samples of (rho(x), w(x)) on [lo, hi].
template <class R, class W>
GridProfile make(double lo, double hi, std::size_t n, R rho, W w, double t = 0.0) {
  GridProfile g;
  g.t = t;
  g.support_lo = lo;
  g.support_hi = hi;
  for (std::size_t i = 0; i <= n; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
    g.x.push_back(x);
    g.rho.push_back(rho(x));
    g.w.push_back(w(x));
  }
  return g;
}

GridProfile bump(double shift, double amp = 1.0) {
  return make(
      -1.0 + shift, 1.0 + shift, 200, [=](double x) { return amp * std::max(0.0, 1.0 - (x - shift) * (x - shift)); },
      [=](double x) { return 0.01 * (x - shift); });
}

}  // namespace

TEST(SupNorm, IsAMetric) {
  const auto a = bump(0.0), b = bump(0.1), c = bump(0.25, 1.2);
  for (Field f : {Field::rho, Field::w}) {
    EXPECT_EQ(supnorm_diff(a, a, f), 0.0);
    EXPECT_DOUBLE_EQ(supnorm_diff(a, b, f), supnorm_diff(b, a, f));
    EXPECT_LE(supnorm_diff(a, c, f), supnorm_diff(a, b, f) + supnorm_diff(b, c, f) + 1e-12);
  }
  EXPECT_GT(supnorm_diff(a, b, Field::rho), 0.0);
}

TEST(SupNorm, DensityIsZeroOutsideSupport) {
  const auto a = bump(0.0);
  const auto far = bump(10.0);
  // disjoint supports: the difference is the larger peak
  EXPECT_NEAR(supnorm_diff(a, far, Field::rho, 0.01), 1.0, 1e-6);
  // w is absent on the other side everywhere, nothing to compare
  EXPECT_EQ(supnorm_diff(a, far, Field::w, 0.01), 0.0);
}

TEST(SupNorm, ComparisonGridCoversUnion) {
  const auto a = bump(0.0), b = bump(0.5);
  const auto xs = comparison_grid(a, b, 0.1);
  EXPECT_DOUBLE_EQ(xs.front(), -1.0);
  EXPECT_DOUBLE_EQ(xs.back(), 1.5);
  EXPECT_EQ(xs.size(), 26u);
  EXPECT_NEAR(median_spacing(a), 0.01, 1e-12);
}

TEST(DecayFit, RecoversSyntheticRate) {
  const double sigma = 30.0;
  std::vector<double> t, W;
  for (int k = 0; k <= 100; ++k) {
    t.push_back(0.004 * k);
    W.push_back(3.0 * std::exp(-2.0 * sigma * t.back()));
  }
  const auto fit = decay_fit(t, W, sigma);
  EXPECT_NEAR(fit.slope, -2.0 * sigma, 1e-9);
  EXPECT_LT(fit.deviation, 1e-11);
  EXPECT_LT(fit.max_log_error, 1e-10);
  EXPECT_EQ(fit.samples, 101u);
}

TEST(DecayFit, StopsAtTheFloor) {
  const double sigma = 30.0;
  std::vector<double> t, W;
  for (int k = 0; k <= 100; ++k) {
    t.push_back(0.01 * k);
    W.push_back(std::exp(-2.0 * sigma * t.back()));  // falls below 1e-12 near t = 0.46
  }
  const auto fit = decay_fit(t, W, sigma);
  EXPECT_LT(fit.t_last, 0.47);
  EXPECT_GT(fit.t_last, 0.44);
  EXPECT_NEAR(fit.slope, -60.0, 1e-8);
}

TEST(DecayFit, Errors) {
  std::vector<double> t = {0.0, 1.0};
  std::vector<double> bad = {0.0, 1.0};
  EXPECT_THROW(decay_fit(t, bad, 1.0), ConfigError);
  std::vector<double> tiny = {1.0, 1e-20};
  EXPECT_THROW(decay_fit(t, tiny, 1.0), SolverError);
  std::vector<double> shortt = {0.0};
  EXPECT_THROW(decay_fit(shortt, tiny, 1.0), ConfigError);
}

TEST(MeanFlow, ConstantState) {
  const auto g = make(0.0, 4.0, 400, [](double) { return 20.0; }, [](double) { return 90.0; });
  EXPECT_NEAR(support_mean_flow(g, 1e-6), 1800.0, 1e-9);
  std::vector<GridProfile> series = {g, g, g};
  series[1].t = 0.5;
  series[2].t = 1.0;
  EXPECT_NEAR(mean_flow(series, 1.0, 1e-6), 1800.0, 1e-9);
}

TEST(MeanFlow, ThresholdTrimsTheSupport) {
  // rho = 1 on [0, 1], 1e-9 beyond: the tail is below the threshold
  const auto g = make(0.0, 3.0, 300, [](double x) { return x <= 1.0 ? 1.0 : 1e-9; },
                      [](double) { return 50.0; });
  EXPECT_NEAR(support_mean_flow(g, 1e-6), 50.0, 1e-9);
  EXPECT_LT(support_mean_flow(g, 1e-12), 20.0);
}

TEST(MeanFlow, DimensionlessPathMatchesDimensional) {
  DimensionalParams d;
  d.v_star = 102.0;
  d.rho_bar = 31.0;
  d.rho_max = 180.0;
  d.v_max = 130.0;
  d.sigma_tilde = 3060.0;
  const auto g = make(-1.0, 2.0, 300, [](double x) { return 1.2 - 0.3 * x * x + 0.31; },
                      [](double x) { return -0.2 + 0.05 * x; }, 0.4);
  const double direct = support_mean_flow(g, 1e-3, d);
  const double via = support_mean_flow(to_dimensional(g, d), 1e-3);
  EXPECT_NEAR(direct, via, 1e-9 * via);
}

TEST(MeanFlow, EmptySupportThrows) {
  const auto g = make(0.0, 1.0, 10, [](double) { return 0.0; }, [](double) { return 0.0; });
  EXPECT_THROW(support_mean_flow(g, 1e-6), SolverError);
}

TEST(Functionals, EquilibriumHasNoEnergy) {
  const Model m(ModelParams{});
  const auto g = make(0.0, 2.0, 200, [](double) { return 0.8; }, [](double) { return 0.0; });
  const auto f = grid_functionals(g, m);
  EXPECT_NEAR(f.mass, 1.6, 1e-12);
  EXPECT_EQ(f.E, 0.0);
  EXPECT_EQ(f.W, 0.0);
}

TEST(Functionals, MatchParticleSystem) {
  const Scenario sc = academic_example();
  const ModelParams p = rescaled(sc.model, 30);
  const ParticleSystem ps{Model(p)};
  const auto st = place_particles(sc, p).state;
  const auto f = particle_functionals(ps, st);
  EXPECT_EQ(f.mass, ps.total_mass());
  EXPECT_EQ(f.E, ps.energy(st));
  EXPECT_EQ(f.W, ps.energy_W(st));
}

TEST(Functionals, SeriesValidation) {
  FunctionalSeries s;
  s.push(0.0, {1.0, 1.0, 1.0});
  s.push(1.0, {1.0, 0.5, 0.2});
  EXPECT_NO_THROW(s.validate());
  s.push(1.0, {1.0, 0.4, 0.1});
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST(Acceleration, UniformFlowHasNone) {
  auto a = make(0.0, 2.0, 100, [](double) { return 1.0; }, [](double) { return 0.02; }, 0.0);
  auto b = a;
  b.t = 0.5;
  for (double& x : b.x) x += 0.01;  // advected by w dt
  b.support_lo += 0.01;
  b.support_hi += 0.01;
  EXPECT_NEAR(accel_supnorm(a, b), 0.0, 1e-12);
}

TEST(Acceleration, UniformSpeedup) {
  const double acc = 0.3;
  auto a = make(0.0, 2.0, 100, [](double) { return 1.0; }, [](double) { return 0.0; }, 0.0);
  auto b = make(0.0, 2.0, 100, [](double) { return 1.0; }, [&](double) { return acc * 0.1; }, 0.1);
  EXPECT_NEAR(accel_supnorm(a, b), acc, 1e-12);
  std::vector<GridProfile> series = {a, b};
  const auto s = accel_series(series);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_NEAR(s[0], acc, 1e-12);
  EXPECT_THROW(accel_supnorm(b, a), ConfigError);
}
