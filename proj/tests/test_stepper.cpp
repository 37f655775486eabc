#include <gtest/gtest.h>

#include <cmath>
#include <span>
#include <vector>

#include "avflow/stepper.hpp"

using namespace avflow;

namespace {

auto decay = [](double, std::span<const double> y, std::span<double> d) {
  for (std::size_t i = 0; i < y.size(); ++i) d[i] = -y[i];
};

StepperConfig tight(double t_end) {
  StepperConfig c;
  c.atol = 1e-8;
  c.rtol = 1e-8;
  c.dt0 = 1e-3;
  c.t_end = t_end;
  return c;
}

}  // namespace

TEST(Controller, Formula) {
  EXPECT_DOUBLE_EQ(controller_dt(0.1, 0.0, 2.0), 0.2);
  EXPECT_DOUBLE_EQ(controller_dt(0.1, 1e-6, 2.0), 0.2);         // capped by p
  EXPECT_DOUBLE_EQ(controller_dt(0.1, 0.81, 2.0), 0.1);         // 0.9 / 0.9
  EXPECT_DOUBLE_EQ(controller_dt(0.1, 4.0, 2.0), 0.1 * 0.45);  // shrink on rejection
  EXPECT_LT(controller_dt(0.1, 1.0, 5.0), 0.1);
}

TEST(Heun, ExponentialDecayAccuracy) {
  std::vector<double> outs = {0.5, 1.0, 2.0};
  auto res = integrate(decay, {1.0, 2.0}, 0.0, tight(3.0), outs, [](double, auto, bool) {});
  EXPECT_DOUBLE_EQ(res.t, 3.0);
  EXPECT_NEAR(res.y[0], std::exp(-3.0), 1e-6);
  EXPECT_NEAR(res.y[1], 2.0 * std::exp(-3.0), 2e-6);
  EXPECT_GT(res.stats.accepted, 10u);
  // one priming call, two per accepted step, one per rejection
  EXPECT_EQ(res.stats.rhs_evals, 1 + 2 * res.stats.accepted + res.stats.rejected);
}

TEST(Heun, LandsExactlyOnOutputs) {
  std::vector<double> outs = {0.0, 0.1, 0.3333333333333333, 0.7, 1.0};
  std::vector<double> hit;
  integrate(decay, {1.0}, 0.0, tight(1.0), outs, [&](double t, auto, bool out) {
    if (out) hit.push_back(t);
  });
  ASSERT_EQ(hit.size(), outs.size());
  for (std::size_t i = 0; i < outs.size(); ++i) EXPECT_EQ(hit[i], outs[i]);
}

TEST(Heun, ErrorShrinksWithTolerance) {
  double prev = 1.0;
  for (double tol : {1e-4, 1e-6, 1e-8}) {
    StepperConfig c = tight(2.0);
    c.atol = c.rtol = tol;
    auto res = integrate(decay, {1.0}, 0.0, c, {}, [](double, auto, bool) {});
    const double err = std::abs(res.y[0] - std::exp(-2.0));
    EXPECT_LT(err, prev);
    prev = err;
  }
}

TEST(Heun, DomainErrorIsARejection) {
  // y' = -y is only defined for y > 0.1 here; the Euler predictor of the
  // first trial lands at -0.5 and must be retried.
  auto rhs = [](double, std::span<const double> y, std::span<double> d) {
    if (y[0] <= 0.1) throw DomainError("below floor");
    d[0] = -y[0];
  };
  StepperConfig c;
  c.dt0 = 1.5;
  c.dt_min = 1e-9;
  c.t_end = 1.5;
  auto res = integrate(rhs, {1.0}, 0.0, c, {}, [](double, auto, bool) {});
  EXPECT_NEAR(res.y[0], std::exp(-1.5), 1e-3);
  EXPECT_EQ(res.t, 1.5);
  EXPECT_GE(res.stats.domain_rejects, 1u);
  EXPECT_GE(res.stats.rejected, res.stats.domain_rejects);
}

TEST(Heun, UnrecoverableDomainRaisesSolverError) {
  auto rhs = [](double t, std::span<const double>, std::span<double> d) {
    if (t > 0.0) throw DomainError("never admissible after t = 0");
    d[0] = 0.0;
  };
  StepperConfig c;
  c.t_end = 1.0;
  c.dt_min = 1e-10;
  EXPECT_THROW(integrate(rhs, {1.0}, 0.0, c, {}, [](double, auto, bool) {}), SolverError);
}

TEST(Heun, AttemptDoesNotTouchStateOnRejection) {
  StepperConfig c = tight(1.0);
  EmbeddedHeun<decltype(decay)&> st(decay, 1, c);
  std::vector<double> y = {1.0};
  double t = 0.0;
  st.prime(t, y);
  auto rep = st.attempt(t, y, 0.5);  // err far above 1 at tol 1e-8
  EXPECT_FALSE(rep.accepted);
  EXPECT_EQ(t, 0.0);
  EXPECT_EQ(y[0], 1.0);
  EXPECT_LT(rep.dt_next, 0.5);
}

TEST(Heun, FirstSameAsLast) {
  // accepted steps cost two evaluations, one of them reused as the next k1
  StepperConfig c = tight(1.0);
  c.atol = c.rtol = 1e-3;
  EmbeddedHeun<decltype(decay)&> st(decay, 1, c);
  std::vector<double> y = {1.0};
  double t = 0.0;
  st.prime(t, y);
  for (int k = 0; k < 5; ++k) ASSERT_TRUE(st.attempt(t, y, 1e-3).accepted);
  EXPECT_EQ(st.stats().rhs_evals, 1u + 2u * 5u);
}

TEST(StepperConfig, Validation) {
  StepperConfig c;
  c.atol = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = StepperConfig{};
  c.p_factor = 0.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = StepperConfig{};
  c.dt_min = c.dt0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = StepperConfig{};
  c.t_end = -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_NO_THROW(StepperConfig{}.validate());
}
