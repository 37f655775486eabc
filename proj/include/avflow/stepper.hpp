#pragma once

// Adaptive embedded explicit Euler / Heun pair with the controller
//   dt_new = dt * min(p, 0.9 * sqrt(1 / err)),
// err the RMS of (y_Euler - y_Heun) / sc over all components and
// sc = atol + rtol * max(|y|, |y_Heun|).
//
// Rhs is any callable  void(double t, std::span<const double> y, std::span<double> dydt)
// that throws DomainError when y is outside its domain.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "avflow/errors.hpp"

namespace avflow {

struct StepperConfig {
  double atol = 1e-4;
  double rtol = 1e-4;
  double p_factor = 2.0;
  double dt0 = 1e-4;
  double dt_min = 1e-12;
  double t_end = 1.0;
  std::size_t max_rejects = 1000000;

  void validate() const {
    auto bad = [](const char* what) { throw ConfigError(std::string("StepperConfig: ") + what); };
    if (!(atol > 0.0)) bad("atol must be > 0");
    if (!(rtol > 0.0)) bad("rtol must be > 0");
    if (!(p_factor >= 1.0)) bad("p_factor must be >= 1");
    if (!(dt0 > 0.0)) bad("dt0 must be > 0");
    if (!(dt_min > 0.0) || !(dt_min < dt0)) bad("need 0 < dt_min < dt0");
    if (!(t_end > 0.0)) bad("t_end must be > 0");
  }
};

struct StepReport {
  double t = 0.0;        // time reached
  double dt_used = 0.0;  // accepted step
  double dt_next = 0.0;  // controller proposal for the next step
  double err = 0.0;
  bool accepted = false;
  std::size_t n_rejects = 0;
};

struct StepperStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t domain_rejects = 0;  // rejections caused by a DomainError
  std::size_t rhs_evals = 0;
};

// dt * min(p, 0.9 sqrt(1/err)); p * dt when err == 0.
inline double controller_dt(double dt, double err, double p) {
  if (!(err > 0.0)) return p * dt;
  return dt * std::min(p, 0.9 * std::sqrt(1.0 / err));
}

template <class Rhs>
class EmbeddedHeun {
 public:
  EmbeddedHeun(Rhs rhs, std::size_t dim, const StepperConfig& cfg)
      : rhs_(std::forward<Rhs>(rhs)), cfg_(cfg), k1_(dim), k2_(dim), ye_(dim), yh_(dim), kh_(dim) {
    cfg_.validate();
  }

  const StepperConfig& config() const noexcept { return cfg_; }
  const StepperStats& stats() const noexcept { return stats_; }

  // Must be called once before the first step and whenever y changes
  // outside of step(); caches f(t, y) for reuse as the next k1.
  void prime(double t, std::span<const double> y) {
    eval(t, y, k1_);
    primed_ = true;
  }

  // One trial of size dt. On acceptance y and t are advanced and k1 is
  // refreshed from the Heun value. Returns the controller's suggestion in
  // report.dt_next either way.
  StepReport attempt(double& t, std::span<double> y, double dt) {
    if (!primed_) prime(t, y);
    StepReport rep;
    rep.t = t;
    const std::size_t n = y.size();
    for (std::size_t i = 0; i < n; ++i) ye_[i] = y[i] + dt * k1_[i];
    try {
      eval(t + dt, ye_, k2_);
    } catch (const DomainError&) {
      ++stats_.domain_rejects;
      rep.err = std::numeric_limits<double>::infinity();
      rep.dt_next = 0.5 * dt;
      return rep;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      yh_[i] = y[i] + 0.5 * dt * (k1_[i] + k2_[i]);
      const double sc = cfg_.atol + cfg_.rtol * std::max(std::abs(y[i]), std::abs(yh_[i]));
      const double e = (ye_[i] - yh_[i]) / sc;
      acc += e * e;
    }
    rep.err = std::sqrt(acc / static_cast<double>(n));
    if (!std::isfinite(rep.err)) {
      rep.err = std::numeric_limits<double>::infinity();
      rep.dt_next = 0.5 * dt;
      return rep;
    }
    rep.dt_next = controller_dt(dt, rep.err, cfg_.p_factor);
    if (rep.err > 1.0) return rep;
    // Candidate must itself be admissible: its derivative seeds the next step.
    try {
      eval(t + dt, yh_, kh_);
    } catch (const DomainError&) {
      ++stats_.domain_rejects;
      rep.dt_next = 0.5 * dt;
      return rep;
    }
    std::copy(yh_.begin(), yh_.end(), y.begin());
    std::swap(k1_, kh_);
    t += dt;
    rep.t = t;
    rep.dt_used = dt;
    rep.accepted = true;
    return rep;
  }

  // Retries with shrinking dt until a trial is accepted.
  StepReport step(double& t, std::span<double> y, double dt) {
    std::size_t rejects = 0;
    for (;;) {
      if (dt < cfg_.dt_min) {
        std::ostringstream os;
        os << "step size underflow at t = " << t << " (dt = " << dt << ", " << rejects
           << " rejections)";
        throw SolverError(os.str());
      }
      StepReport rep = attempt(t, y, dt);
      if (rep.accepted) {
        rep.n_rejects = rejects;
        ++stats_.accepted;
        return rep;
      }
      ++stats_.rejected;
      if (++rejects > cfg_.max_rejects) throw SolverError("rejection cap exceeded");
      // Strictly smaller retry even if the controller would allow more.
      dt = std::min(rep.dt_next, 0.999 * dt);
    }
  }

 private:
  void eval(double t, std::span<const double> y, std::vector<double>& out) {
    ++stats_.rhs_evals;
    rhs_(t, y, std::span<double>(out));
  }

  Rhs rhs_;
  StepperConfig cfg_;
  StepperStats stats_;
  bool primed_ = false;
  std::vector<double> k1_, k2_, ye_, yh_, kh_;
};

struct IntegrationResult {
  double t = 0.0;
  std::vector<double> y;
  StepperStats stats;
};

// Integrates from t0 to cfg.t_end. Steps are clipped to land exactly on
// every entry of `outputs` and on t_end. The observer is called as
// observer(t, y, is_output) at t0 and after every accepted step; is_output
// is set on the steps that land on an output time or on t_end.
template <class Rhs, class Observer>
IntegrationResult integrate(Rhs&& rhs, std::vector<double> y0, double t0, const StepperConfig& cfg,
                            std::span<const double> outputs, Observer&& observer) {
  cfg.validate();
  EmbeddedHeun<Rhs&> st(rhs, y0.size(), cfg);
  std::vector<double> targets;
  for (double o : outputs) {
    if (o > t0 && o < cfg.t_end) targets.push_back(o);
  }
  std::sort(targets.begin(), targets.end());
  targets.push_back(cfg.t_end);

  double t = t0;
  std::span<double> y(y0);
  st.prime(t, y);
  const bool t0_is_output =
      std::find(outputs.begin(), outputs.end(), t0) != outputs.end();
  observer(t, std::span<const double>(y), t0_is_output);

  double dt = std::min(cfg.dt0, cfg.t_end - t0);
  std::size_t next = 0;
  while (next < targets.size()) {
    const double target = targets[next];
    const double remaining = target - t;
    bool clipped = false;
    double trial = dt;
    if (trial >= remaining * (1.0 - 1e-12) - 4.0 * cfg.dt_min) {
      trial = remaining;
      clipped = true;
    }
    StepReport rep = st.step(t, y, trial);
    const bool landed = clipped && rep.dt_used == trial;
    if (landed) {
      t = target;  // remove round-off so outputs match exactly
      ++next;
    }
    for (double v : y0) {
      if (!std::isfinite(v)) throw SolverError("non-finite state component");
    }
    observer(t, std::span<const double>(y), landed);
    // After an accepted clipped step keep the unclipped schedule.
    dt = landed ? std::max(dt, rep.dt_next) : rep.dt_next;
  }
  return IntegrationResult{t, std::move(y0), st.stats()};
}

}  // namespace avflow
