#pragma once

// ARZ human-driver model in conservative variables U = (rho, y),
// y = rho (v - V(rho)), discretized by a staggered second-order central
// scheme with the relaxation source -y/delta treated implicitly.
// Units: km, h, veh. Cells sit at xi_i = origin + i dxi; every step moves
// the grid half a cell to the left.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include "avflow/errors.hpp"
#include "avflow/numerics.hpp"
#include "avflow/profile.hpp"

namespace avflow {

struct ArzParams {
  double v_f = 102.0;            // km/h
  double rho_c = 33.3;           // veh/km
  double d = 2.34;
  double delta = 20.0 / 3600.0;  // relaxation time (h)
  double rho_max = 180.0;        // veh/km

  void validate() const {
    auto bad = [](const char* what) { throw ConfigError(std::string("ArzParams: ") + what); };
    if (!(v_f > 0.0)) bad("v_f must be > 0");
    if (!(rho_c > 0.0)) bad("rho_c must be > 0");
    if (!(d > 0.0)) bad("d must be > 0");
    if (!(delta > 0.0)) bad("delta must be > 0");
    if (!(rho_max > rho_c)) bad("rho_max must exceed rho_c");
  }
};

struct ArzConfig {
  double dxi = 0.04;    // km
  double dtau = 1e-6;   // h
  // Below this density the recovered speed is clamped to [0, v_f] inside
  // the flux; the state itself is untouched.
  double vacuum_rho = 1e-9;
  // Densities below this (veh/km) become exact vacuum. The central scheme
  // smears the front half a cell per step; without a floor the far tail
  // would widen the grid much faster than any vehicle moves.
  double flush_rho = 1e-14;

  void validate() const {
    if (!(dxi > 0.0) || !(dtau > 0.0)) throw ConfigError("ArzConfig: dxi and dtau must be > 0");
    if (!(vacuum_rho >= 0.0)) throw ConfigError("ArzConfig: vacuum_rho must be >= 0");
    if (!(flush_rho >= 0.0)) throw ConfigError("ArzConfig: flush_rho must be >= 0");
  }
};

// V(rho) = v_f exp(-(rho/rho_c)^d / d).
inline double equilibrium_speed(double rho, const ArzParams& ap) {
  if (rho <= 0.0) return ap.v_f;
  return ap.v_f * std::exp(-std::pow(rho / ap.rho_c, ap.d) / ap.d);
}

inline double minmod(double x, double y) noexcept {
  const int sx = sign_of(x);
  if (sx == 0 || sx != sign_of(y)) return 0.0;
  return sx * std::min(std::abs(x), std::abs(y));
}

struct ArzState {
  std::size_t k = 0;
  double tau = 0.0;      // h
  double dxi = 0.0;
  double origin = 0.0;   // xi of cell 0
  std::vector<double> rho;
  std::vector<double> y;

  double xi(std::size_t i) const { return origin + static_cast<double>(i) * dxi; }
  double mass() const {
    CompensatedSum m;
    for (double r : rho) m.add(r * dxi);
    return m.value();
  }
};

struct ArzStats {
  std::size_t steps = 0;
  double max_cfl = 0.0;
  std::size_t cfl_warnings = 0;
};

class CentralScheme {
 public:
  // |y| below this becomes an exact zero.
  static constexpr double kFlush = 1e-280;

  CentralScheme(const ArzParams& ap, const ArzConfig& cfg) : ap_(ap), cfg_(cfg) {
    ap_.validate();
    cfg_.validate();
  }

  const ArzParams& params() const noexcept { return ap_; }
  const ArzConfig& config() const noexcept { return cfg_; }
  const ArzStats& stats() const noexcept { return stats_; }

  double V(double rho) const { return equilibrium_speed(rho, ap_); }

  // Speed recovered from (rho, y); v_f on vacuum.
  double speed(double rho, double y) const {
    if (rho <= 0.0) return ap_.v_f;
    return y / rho + V(rho);
  }

  // f(U) = (rho v, y v).
  std::pair<double, double> flux(double rho, double y) const {
    if (rho <= 0.0) return {0.0, 0.0};
    double v = y / rho + V(rho);
    if (rho < cfg_.vacuum_rho) v = std::clamp(v, 0.0, ap_.v_f);
    return {rho * v, y * v};
  }

  // Cell averages of rho; y from the pointwise speed at the cell center.
  ArzState init(const Profile& rho0, const Profile& v0) const {
    ArzState s;
    s.dxi = cfg_.dxi;
    const long lo = static_cast<long>(std::floor(rho0.lo / cfg_.dxi)) - 2;
    const long hi = static_cast<long>(std::ceil(rho0.hi / cfg_.dxi)) + 2;
    s.origin = static_cast<double>(lo) * cfg_.dxi;
    for (long i = lo; i <= hi; ++i) {
      const double c = static_cast<double>(i) * cfg_.dxi;
      const double r = rho0.integral(c - 0.5 * cfg_.dxi, c + 0.5 * cfg_.dxi) / cfg_.dxi;
      s.rho.push_back(r);
      s.y.push_back(r > 0.0 ? r * (v0(c) - V(r)) : 0.0);
    }
    trim(s);
    return s;
  }

  void step(ArzState& s, double dtau) {
    const std::size_t N = s.rho.size();
    const std::size_t M = N + 4;  // two vacuum ghosts per side
    std::vector<double> r(M, 0.0), y(M, 0.0), f1(M, 0.0), f2(M, 0.0);
    std::copy(s.rho.begin(), s.rho.end(), r.begin() + 2);
    std::copy(s.y.begin(), s.y.end(), y.begin() + 2);
    double max_speed = 0.0;
    for (std::size_t e = 0; e < M; ++e) {
      const auto [a, b] = flux(r[e], y[e]);
      f1[e] = a;
      f2[e] = b;
      if (r[e] > 0.0) max_speed = std::max(max_speed, wave_speed(r[e], y[e]));
    }
    std::vector<double> dr(M, 0.0), dy(M, 0.0), dfr(M, 0.0), dfy(M, 0.0);
    for (std::size_t e = 1; e + 1 < M; ++e) {
      dr[e] = minmod(r[e + 1] - r[e], r[e] - r[e - 1]);
      dy[e] = minmod(y[e + 1] - y[e], y[e] - y[e - 1]);
      dfr[e] = minmod(f1[e + 1] - f1[e], f1[e] - f1[e - 1]);
      dfy[e] = minmod(f2[e + 1] - f2[e], f2[e] - f2[e - 1]);
    }
    const double lam = dtau / s.dxi;
    const double inv_delta = 1.0 / ap_.delta;
    // half-step predictors (for the flux) and third-step predictors (for the source)
    std::vector<double> g1(M, 0.0), g2(M, 0.0), y3(M, 0.0);
    for (std::size_t e = 0; e < M; ++e) {
      const double rh = r[e] - 0.5 * lam * dfr[e];
      const double yh = (y[e] - 0.5 * lam * dfy[e]) / (1.0 + 0.5 * dtau * inv_delta);
      const auto [a, b] = flux(rh, yh);
      g1[e] = a;
      g2[e] = b;
      y3[e] = (y[e] - lam / 3.0 * dfy[e]) / (1.0 + dtau * inv_delta / 3.0);
    }
    // new staggered values between e and e+1, e = 1..N+1
    std::vector<double> nr(N + 1), ny(N + 1);
    double rmax = 0.0;
    for (std::size_t e = 1; e <= N + 1; ++e) rmax = std::max(rmax, r[e]);
    for (std::size_t e = 1; e <= N + 1; ++e) {
      const std::size_t i = e - 1;
      double rn = 0.5 * (r[e] + r[e + 1]) + 0.125 * (dr[e] - dr[e + 1]) - lam * (g1[e + 1] - g1[e]);
      const double ay =
          0.5 * (y[e] + y[e + 1]) + 0.125 * (dy[e] - dy[e + 1]) - lam * (g2[e + 1] - g2[e]);
      double yn = (ay - dtau * 0.375 * (y3[e] + y3[e + 1]) * inv_delta) /
                  (1.0 + 0.25 * dtau * inv_delta);
      if (rn < 0.0) {
        if (rn < -1e-14 * rmax) {
          std::ostringstream os;
          os << "negative density " << rn << " at xi = " << s.origin + (static_cast<double>(i) - 0.5) * s.dxi;
          throw StateSpaceError(os.str(), i);
        }
        rn = 0.0;
      }
      if (rn < std::max(kFlush, cfg_.flush_rho)) rn = 0.0;
      if (std::abs(yn) < kFlush || rn == 0.0) yn = 0.0;
      if (!std::isfinite(rn) || !std::isfinite(yn)) throw SolverError("non-finite ARZ state");
      nr[i] = rn;
      ny[i] = yn;
    }
    s.rho = std::move(nr);
    s.y = std::move(ny);
    s.origin -= 0.5 * s.dxi;
    s.tau += dtau;
    ++s.k;
    trim(s);
    const double cfl = max_speed * lam;
    stats_.max_cfl = std::max(stats_.max_cfl, cfl);
    if (cfl > 0.5) ++stats_.cfl_warnings;
    ++stats_.steps;
  }
  void step(ArzState& s) { step(s, cfg_.dtau); }

  template <class Observer>
  void run(ArzState& s, double tau_end, std::span<const double> outputs, Observer&& observer) {
    std::vector<double> targets;
    for (double o : outputs) {
      if (o > s.tau && o < tau_end) targets.push_back(o);
    }
    std::sort(targets.begin(), targets.end());
    targets.push_back(tau_end);
    observer(static_cast<const ArzState&>(s),
             std::find(outputs.begin(), outputs.end(), s.tau) != outputs.end());
    std::size_t next = 0;
    while (next < targets.size()) {
      const double target = targets[next];
      double dt = cfg_.dtau;
      bool landed = false;
      if (s.tau + dt >= target - 1e-9 * dt) {
        dt = target - s.tau;
        landed = true;
      }
      step(s, dt);
      if (landed) {
        s.tau = target;
        ++next;
      }
      observer(static_cast<const ArzState&>(s), landed);
    }
  }

  // Dimensional profile: x = xi (km), rho = rho~ (veh/km), w = v~ (km/h),
  // with v_f reported on vacuum cells.
  GridProfile profile(const ArzState& s) const {
    GridProfile g;
    g.t = s.tau;
    std::size_t first = s.rho.size(), last = 0;
    for (std::size_t i = 0; i < s.rho.size(); ++i) {
      g.x.push_back(s.xi(i));
      g.rho.push_back(s.rho[i]);
      g.w.push_back(speed(s.rho[i], s.y[i]));
      if (s.rho[i] > 0.0) {
        first = std::min(first, i);
        last = i;
      }
    }
    if (first < s.rho.size()) {
      g.support_lo = s.xi(first) - 0.5 * s.dxi;
      g.support_hi = s.xi(last) + 0.5 * s.dxi;
    }
    return g;
  }

 private:
  // Largest characteristic speed magnitude: v and v + rho V'(rho).
  double wave_speed(double rho, double y) const {
    double v = speed(rho, y);
    if (rho < cfg_.vacuum_rho) v = std::clamp(v, 0.0, ap_.v_f);
    const double dV = -V(rho) * std::pow(rho / ap_.rho_c, ap_.d) / rho;
    return std::max(std::abs(v), std::abs(v + rho * dV));
  }

  // Drops exact-vacuum cells at both ends, keeping the grid phase.
  static void trim(ArzState& s) {
    std::size_t first = 0;
    while (first < s.rho.size() && s.rho[first] == 0.0 && s.y[first] == 0.0) ++first;
    if (first == s.rho.size()) return;
    std::size_t last = s.rho.size();
    while (last > first && s.rho[last - 1] == 0.0 && s.y[last - 1] == 0.0) --last;
    s.rho = std::vector<double>(s.rho.begin() + static_cast<std::ptrdiff_t>(first),
                                s.rho.begin() + static_cast<std::ptrdiff_t>(last));
    s.y = std::vector<double>(s.y.begin() + static_cast<std::ptrdiff_t>(first),
                              s.y.begin() + static_cast<std::ptrdiff_t>(last));
    s.origin += static_cast<double>(first) * s.dxi;
  }

  ArzParams ap_;
  ArzConfig cfg_;
  ArzStats stats_;
};

}  // namespace avflow
