#pragma once

// One entry point per solver: scenario in, recorded series out. All AV
// methods report dimensionless profiles; the ARZ baseline is mapped into
// the same frame through the scenario's dimensional constants so every
// run can be diffed against every other.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "avflow/analysis.hpp"
#include "avflow/arz.hpp"
#include "avflow/constitutive.hpp"
#include "avflow/nm1_staggered.hpp"
#include "avflow/nm2_lines.hpp"
#include "avflow/particle.hpp"
#include "avflow/profile.hpp"
#include "avflow/reduced.hpp"
#include "avflow/scenario.hpp"
#include "avflow/stepper.hpp"

namespace avflow {

enum class Method { particle, nm1, nm2, reduced, arz };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::particle: return "particle";
    case Method::nm1: return "nm1";
    case Method::nm2: return "nm2";
    case Method::reduced: return "reduced";
    case Method::arz: return "arz";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  for (Method m : {Method::particle, Method::nm1, Method::nm2, Method::reduced, Method::arz}) {
    if (s == method_name(m)) return m;
  }
  throw ConfigError("unknown method '" + s + "' (expected particle, nm1, nm2, reduced or arz)");
}

// Dimensionless profile -> (xi km, rho~ veh/km, v~ km/h) at tau = r t / v*.
inline GridProfile to_dimensional(const GridProfile& g, const DimensionalParams& d) {
  const double tau = d.r / d.v_star * g.t;
  GridProfile o;
  o.t = tau;
  for (std::size_t i = 0; i < g.size(); ++i) {
    o.x.push_back(d.r * g.x[i] + d.v_star * tau);
    o.rho.push_back(d.rho_bar * g.rho[i]);
    o.w.push_back(std::isnan(g.w[i]) ? kAbsent : d.v_star * (1.0 + g.w[i]));
  }
  o.support_lo = d.r * g.support_lo + d.v_star * tau;
  o.support_hi = d.r * g.support_hi + d.v_star * tau;
  return o;
}

inline GridProfile to_dimensionless(const GridProfile& g, const DimensionalParams& d) {
  GridProfile o;
  o.t = d.v_star / d.r * g.t;
  for (std::size_t i = 0; i < g.size(); ++i) {
    o.x.push_back((g.x[i] - d.v_star * g.t) / d.r);
    o.rho.push_back(g.rho[i] / d.rho_bar);
    o.w.push_back(std::isnan(g.w[i]) ? kAbsent : g.w[i] / d.v_star - 1.0);
  }
  o.support_lo = (g.support_lo - d.v_star * g.t) / d.r;
  o.support_hi = (g.support_hi - d.v_star * g.t) / d.r;
  return o;
}

struct RunOptions {
  bool observe = true;         // record series; off when timing
  std::size_t stride = 1;      // functionals every `stride` steps (outputs always)
  std::optional<ModelParams> model;  // replaces the scenario's model block
  std::optional<double> t_end;       // scenario units
};

struct RunResult {
  Method method = Method::particle;
  std::vector<GridProfile> profiles;  // dimensionless, at the scenario output times
  std::vector<GridProfile> samples;   // dimensionless, outputs plus flow sample times
  FunctionalSeries functionals;       // dimensionless t
  std::vector<double> flow;           // support-mean flow (veh/h) beside each functional row
  std::vector<ParticleState> snapshots;  // particle runs, at output times
  double mean_flow = std::numeric_limits<double>::quiet_NaN();  // veh/h
  double wall_seconds = 0.0;
  std::size_t steps = 0;
  std::size_t rejects = 0;
  std::size_t rhs_evals = 0;
  double max_cfl = 0.0;
  double mass_mismatch = std::numeric_limits<double>::quiet_NaN();  // particle placement
  ModelParams model;
};

namespace detail {

// Union of output and flow-sample times inside (0, t_end], sorted.
inline std::vector<double> sample_times(const Scenario& sc, double t_end) {
  std::vector<double> ts;
  for (double o : sc.output_times) {
    if (o <= t_end) ts.push_back(o);
  }
  if (sc.flow_sample > 0.0) {
    const auto k = static_cast<std::size_t>(std::floor(t_end / sc.flow_sample + 1e-9));
    for (std::size_t i = 0; i <= k; ++i) ts.push_back(static_cast<double>(i) * sc.flow_sample);
  }
  ts.push_back(0.0);
  ts.push_back(t_end);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end(),
                       [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)); }),
           ts.end());
  return ts;
}

// Records series during a run; solver-agnostic.
class Recorder {
 public:
  Recorder(const Scenario& sc, const RunOptions& opts, RunResult& out, double t_end_scn)
      : sc_(sc), opts_(opts), out_(out) {
    for (double o : sc.output_times) {
      if (o <= t_end_scn) outputs_.push_back(sc.to_dimensionless_time(o));
    }
    if (sc.dim) {
      const Profile rho = sc.density_dimensional();
      double mx = 0.0;
      for (int k = 0; k <= 4000; ++k) mx = std::max(mx, rho(rho.lo + (rho.hi - rho.lo) * k / 4000.0));
      threshold_ = sc.flow_threshold * mx;
    }
  }

  bool is_output(double t) const {
    for (double o : outputs_) {
      if (std::abs(o - t) <= 1e-12 * std::max(1.0, std::abs(o))) return true;
    }
    return false;
  }

  // g dimensionless at time g.t; `sample` marks a landing on a sample time.
  template <class EnergyFn>
  void observe(const GridProfile& g, bool sample, EnergyFn&& energy) {
    if (!opts_.observe) return;
    const bool out = sample && is_output(g.t);
    double q = std::numeric_limits<double>::quiet_NaN();
    if (sc_.dim) {
      const double tau = sc_.dim->r / sc_.dim->v_star * g.t;
      q = support_mean_flow(g, threshold_, *sc_.dim);
      if (have_prev_) flow_int_.add(0.5 * (tau - prev_tau_) * (prev_q_ + q));
      prev_tau_ = tau;
      prev_q_ = q;
      have_prev_ = true;
    }
    if (out || count_++ % opts_.stride == 0 || sample) {
      if (out_.functionals.t.empty() || g.t > out_.functionals.t.back()) {
        out_.functionals.push(g.t, energy());
        out_.flow.push_back(q);
      }
    }
    if (sample) out_.samples.push_back(g);
    if (out) out_.profiles.push_back(g);
  }

  void finish(double t_end_hours) {
    if (opts_.observe && sc_.dim && have_prev_) out_.mean_flow = flow_int_.value() / t_end_hours;
  }

  double threshold() const { return threshold_; }

 private:
  const Scenario& sc_;
  const RunOptions& opts_;
  RunResult& out_;
  std::vector<double> outputs_;
  double threshold_ = 0.0;
  std::size_t count_ = 0;
  CompensatedSum flow_int_;
  bool have_prev_ = false;
  double prev_tau_ = 0.0, prev_q_ = 0.0;
};

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace detail

inline RunResult run_particle(const Scenario& sc, const RunOptions& opts = {}) {
  RunResult res;
  res.method = Method::particle;
  res.model = opts.model.value_or(sc.model);
  const double t_end_scn = opts.t_end.value_or(sc.t_end);
  const double t_end = sc.to_dimensionless_time(t_end_scn);
  const Placement pl = place_particles(sc, res.model);
  res.mass_mismatch = pl.mismatch();
  const Model model(res.model);
  const ParticleSystem ps(model);
  ps.check(pl.state);
  std::vector<double> targets;
  for (double v : detail::sample_times(sc, t_end_scn)) targets.push_back(sc.to_dimensionless_time(v));
  detail::Recorder rec(sc, opts, res, t_end_scn);
  const StepperConfig cfg = sc.particle.config(t_end);
  bool first = true;
  const auto t0 = detail::Clock::now();
  const auto ir = integrate(ps, pl.state.pack(), 0.0, cfg, targets,
                            [&](double t, std::span<const double> y, bool landed) {
                              if (!opts.observe) return;
                              const bool sample = landed || first;
                              first = false;
                              const ParticleState s = ParticleState::unpack(t, y);
                              rec.observe(ps.profile(s), sample,
                                          [&] { return particle_functionals(ps, s); });
                              if (sample && rec.is_output(t)) res.snapshots.push_back(s);
                            });
  res.wall_seconds = detail::seconds_since(t0);
  res.steps = ir.stats.accepted;
  res.rejects = ir.stats.rejected;
  res.rhs_evals = ir.stats.rhs_evals;
  rec.finish(sc.dim ? sc.to_hours(t_end_scn) : 1.0);
  return res;
}

inline RunResult run_nm1(const Scenario& sc, const RunOptions& opts = {}) {
  RunResult res;
  res.method = Method::nm1;
  res.model = opts.model.value_or(sc.model);
  const double t_end_scn = opts.t_end.value_or(sc.t_end);
  const double t_end = sc.to_dimensionless_time(t_end_scn);
  const Model model(res.model);
  const StaggeredScheme scheme(model, sc.nm1);
  StaggeredState s = scheme.init(sc.density_dimensionless(), sc.speed_dimensionless());
  std::vector<double> targets;
  for (double v : detail::sample_times(sc, t_end_scn)) targets.push_back(sc.to_dimensionless_time(v));
  detail::Recorder rec(sc, opts, res, t_end_scn);
  bool first = true;
  double max_cfl = 0.0;
  const auto t0 = detail::Clock::now();
  scheme.run(s, t_end, targets, [&](const StaggeredState& st, bool landed) {
    max_cfl = std::max(max_cfl, scheme.max_cfl(st, sc.nm1.dt));
    if (!opts.observe) return;
    const bool sample = landed || first;
    first = false;
    const GridProfile g = scheme.profile(st);
    rec.observe(g, sample, [&] { return grid_functionals(g, model); });
  });
  res.wall_seconds = detail::seconds_since(t0);
  res.steps = s.k;
  res.max_cfl = max_cfl;
  rec.finish(sc.dim ? sc.to_hours(t_end_scn) : 1.0);
  return res;
}

inline RunResult run_nm2(const Scenario& sc, const RunOptions& opts = {}) {
  RunResult res;
  res.method = Method::nm2;
  res.model = opts.model.value_or(sc.model);
  const double t_end_scn = opts.t_end.value_or(sc.t_end);
  const DimensionalModel dm(sc.dimensional(), sc.nm2_n, res.model.a, res.model.c);
  const Model model(res.model);
  const Profile rho0 = sc.density_dimensional();
  const LagrangianState ls = to_lagrangian(rho0, sc.speed_dimensional(), sc.nm2_n);
  const MethodOfLines mol(dm, sc.nm2_n, ls.ds);
  const std::vector<double> y0 = ls.pack();
  NodeTracker tracker(mol, initial_nodes(rho0, sc.nm2_n), y0, 0.0);
  std::vector<double> targets;
  for (double v : detail::sample_times(sc, t_end_scn)) targets.push_back(sc.to_hours(v));
  detail::Recorder rec(sc, opts, res, t_end_scn);
  const StepperConfig cfg = sc.nm2.config(sc.to_hours(t_end_scn));
  bool first = true;
  const auto t0 = detail::Clock::now();
  const auto ir = integrate(mol, y0, 0.0, cfg, targets,
                            [&](double h, std::span<const double> y, bool landed) {
                              if (!first) tracker.advance(h, y);
                              const bool sample = landed || first;
                              first = false;
                              if (!opts.observe) return;
                              GridProfile g = mol.eulerian(h, tracker.positions(), y);
                              rec.observe(g, sample, [&] { return grid_functionals(g, model); });
                            });
  res.wall_seconds = detail::seconds_since(t0);
  res.steps = ir.stats.accepted;
  res.rejects = ir.stats.rejected;
  res.rhs_evals = ir.stats.rhs_evals;
  rec.finish(sc.to_hours(t_end_scn));
  return res;
}

inline RunResult run_reduced(const Scenario& sc, const RunOptions& opts = {}) {
  RunResult res;
  res.method = Method::reduced;
  res.model = opts.model.value_or(sc.model);
  const double t_end_scn = opts.t_end.value_or(sc.t_end);
  const double t_end = sc.to_dimensionless_time(t_end_scn);
  const Model model(res.model);
  const ReducedScheme scheme(model, sc.reduced);
  ReducedState s = scheme.init(sc.density_dimensionless());
  std::vector<double> targets;
  for (double v : detail::sample_times(sc, t_end_scn)) targets.push_back(sc.to_dimensionless_time(v));
  detail::Recorder rec(sc, opts, res, t_end_scn);
  bool first = true;
  const auto t0 = detail::Clock::now();
  scheme.run(s, t_end, targets, [&](const ReducedState& st, bool landed) {
    if (!opts.observe) return;
    const bool sample = landed || first;
    first = false;
    const GridProfile g = scheme.profile(st);
    rec.observe(g, sample, [&] { return grid_functionals(g, model); });
  });
  res.wall_seconds = detail::seconds_since(t0);
  res.steps = s.k;
  rec.finish(sc.dim ? sc.to_hours(t_end_scn) : 1.0);
  return res;
}

inline RunResult run_arz(const Scenario& sc, const RunOptions& opts = {}) {
  RunResult res;
  res.method = Method::arz;
  res.model = opts.model.value_or(sc.model);
  const double t_end_scn = opts.t_end.value_or(sc.t_end);
  const DimensionalParams& d = sc.dimensional();
  const Model model(res.model);
  CentralScheme scheme(sc.arz, sc.arz_grid);
  ArzState s = scheme.init(sc.density_dimensional(), sc.speed_dimensional());
  std::vector<double> targets;
  for (double v : detail::sample_times(sc, t_end_scn)) targets.push_back(sc.to_hours(v));
  detail::Recorder rec(sc, opts, res, t_end_scn);
  const double mass_scale = 1.0 / (d.rho_bar * d.r);
  bool first = true;
  const auto t0 = detail::Clock::now();
  scheme.run(s, sc.to_hours(t_end_scn), targets, [&](const ArzState& st, bool landed) {
    if (!opts.observe) return;
    const bool sample = landed || first;
    first = false;
    const GridProfile g = to_dimensionless(scheme.profile(st), d);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    rec.observe(g, sample, [&] { return Functionals{st.mass() * mass_scale, nan, nan}; });
  });
  res.wall_seconds = detail::seconds_since(t0);
  res.steps = s.k;
  res.max_cfl = scheme.stats().max_cfl;
  rec.finish(sc.to_hours(t_end_scn));
  return res;
}

inline RunResult run_method(Method m, const Scenario& sc, const RunOptions& opts = {}) {
  switch (m) {
    case Method::particle: return run_particle(sc, opts);
    case Method::nm1: return run_nm1(sc, opts);
    case Method::nm2: return run_nm2(sc, opts);
    case Method::reduced: return run_reduced(sc, opts);
    case Method::arz: return run_arz(sc, opts);
  }
  throw ConfigError("unknown method");
}

}  // namespace avflow
