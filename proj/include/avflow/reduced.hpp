#pragma once

// Conservative explicit scheme for the degenerate heat-type equation
//   rho_t + (rho beta^{-1}(-kappa(rho) rho_x / rho))_x = 0
// on cells x_j = (i0 + j) dx. Face j is the left face of cell j.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <vector>

#include "avflow/constitutive.hpp"
#include "avflow/errors.hpp"
#include "avflow/numerics.hpp"
#include "avflow/profile.hpp"

namespace avflow {

struct ReducedConfig {
  double dt = 0.0033;
  double dx = 0.0178;
  std::size_t pad = 4;
  double growth_limit = 0.01;  // abort if max rho grows by more than this fraction

  void validate() const {
    if (!(dt > 0.0) || !(dx > 0.0)) throw ConfigError("ReducedConfig: dt and dx must be > 0");
    if (pad < 2) throw ConfigError("ReducedConfig: pad must be >= 2");
  }
};

struct ReducedState {
  std::size_t k = 0;
  double t = 0.0;
  double dx = 0.0;
  long i0 = 0;
  std::vector<double> rho;

  double center(std::size_t j) const { return static_cast<double>(i0 + static_cast<long>(j)) * dx; }
  double mass() const {
    CompensatedSum m;
    for (double r : rho) m.add(r * dx);
    return m.value();
  }
};

class ReducedScheme {
 public:
  ReducedScheme(const Model& model, const ReducedConfig& cfg) : m_(model), cfg_(cfg) {
    cfg_.validate();
  }

  const ReducedConfig& config() const noexcept { return cfg_; }

  // Implied face speed beta^{-1}(-kappa(rho_f) (rho_r - rho_l) / (rho_f dx)); zero when the
  // face mean is at or below the interaction density.
  double face_speed(double rho_l, double rho_r, double dx) const {
    const double rf = 0.5 * (rho_l + rho_r);
    if (rf <= 1.0) return 0.0;
    if (!(rf < m_.params().R - Model::kGuard)) throw DomainError("face density reached R");
    return m_.beta_inv(-m_.kappa_raw(rf) * (rho_r - rho_l) / (rf * dx));
  }

  double flux(double rho_l, double rho_r, double dx) const {
    return 0.5 * (rho_l + rho_r) * face_speed(rho_l, rho_r, dx);
  }

  ReducedState init(const Profile& rho0) const {
    const double dx = cfg_.dx;
    ReducedState s;
    s.dx = dx;
    const long lo = static_cast<long>(std::floor(rho0.lo / dx + 0.5)) - static_cast<long>(cfg_.pad);
    const long hi = static_cast<long>(std::ceil(rho0.hi / dx - 0.5)) + static_cast<long>(cfg_.pad);
    s.i0 = lo;
    s.rho.resize(static_cast<std::size_t>(hi - lo + 1));
    for (std::size_t j = 0; j < s.rho.size(); ++j) {
      const double c = s.center(j);
      s.rho[j] = rho0.integral(c - 0.5 * dx, c + 0.5 * dx) / dx;
    }
    return s;
  }

  void step(ReducedState& s, double dt) const {
    const std::size_t N = s.rho.size();
    const double lam = dt / s.dx;
    std::vector<double> F(N + 1, 0.0);
    for (std::size_t j = 1; j < N; ++j) F[j] = flux(s.rho[j - 1], s.rho[j], s.dx);
    double old_max = 0.0, new_max = 0.0;
    std::vector<double> out(N);
    for (std::size_t j = 0; j < N; ++j) {
      old_max = std::max(old_max, s.rho[j]);
      const double r = s.rho[j] - lam * (F[j + 1] - F[j]);
      if (r < 0.0) {
        std::ostringstream os;
        os << "negative density at x = " << s.center(j) << "; reduce dt";
        throw StateSpaceError(os.str(), j);
      }
      out[j] = r;
      new_max = std::max(new_max, r);
    }
    if (new_max > old_max * (1.0 + cfg_.growth_limit)) {
      std::ostringstream os;
      os << "instability: max density grew from " << old_max << " to " << new_max
         << " at t = " << s.t << "; reduce dt";
      throw SolverError(os.str());
    }
    s.rho = std::move(out);
    s.t += dt;
    ++s.k;
    ensure_padding(s);
  }
  void step(ReducedState& s) const { step(s, cfg_.dt); }

  template <class Observer>
  void run(ReducedState& s, double t_end, std::span<const double> outputs,
           Observer&& observer) const {
    std::vector<double> targets;
    for (double o : outputs) {
      if (o > s.t && o < t_end) targets.push_back(o);
    }
    std::sort(targets.begin(), targets.end());
    targets.push_back(t_end);
    observer(static_cast<const ReducedState&>(s),
             std::find(outputs.begin(), outputs.end(), s.t) != outputs.end());
    std::size_t next = 0;
    while (next < targets.size()) {
      const double target = targets[next];
      double dt = cfg_.dt;
      bool landed = false;
      if (s.t + dt >= target - 1e-12 * std::max(1.0, std::abs(target))) {
        dt = target - s.t;
        landed = true;
      }
      step(s, dt);
      if (landed) {
        s.t = target;
        ++next;
      }
      observer(static_cast<const ReducedState&>(s), landed);
    }
  }

  // Cell-center profile; w is the mean of the two adjacent implied face speeds.
  GridProfile profile(const ReducedState& s) const {
    const std::size_t N = s.rho.size();
    std::vector<double> u(N + 1, 0.0);
    for (std::size_t j = 1; j < N; ++j) u[j] = face_speed(s.rho[j - 1], s.rho[j], s.dx);
    GridProfile g;
    g.t = s.t;
    std::size_t first = N, last = 0;
    for (std::size_t j = 0; j < N; ++j) {
      g.x.push_back(s.center(j));
      g.rho.push_back(s.rho[j]);
      g.w.push_back(s.rho[j] > 0.0 ? 0.5 * (u[j] + u[j + 1]) : kAbsent);
      if (s.rho[j] > 0.0) {
        first = std::min(first, j);
        last = j;
      }
    }
    if (first < N) {
      g.support_lo = s.center(first) - 0.5 * s.dx;
      g.support_hi = s.center(last) + 0.5 * s.dx;
    }
    return g;
  }

 private:
  void ensure_padding(ReducedState& s) const {
    const std::size_t N = s.rho.size();
    std::size_t first = N, last = 0;
    for (std::size_t j = 0; j < N; ++j) {
      if (s.rho[j] > 0.0) {
        first = std::min(first, j);
        last = j;
      }
    }
    if (first == N) return;
    if (first < 2) {
      s.rho.insert(s.rho.begin(), cfg_.pad, 0.0);
      s.i0 -= static_cast<long>(cfg_.pad);
    }
    if (last + 2 >= s.rho.size()) s.rho.insert(s.rho.end(), cfg_.pad, 0.0);
  }

  Model m_;
  ReducedConfig cfg_;
};

}  // namespace avflow
