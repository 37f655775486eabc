#pragma once

// Cross-method diagnostics on GridProfiles: mass/energy functionals,
// sup-norm differences on a shared grid, log-decay fits, the time-space
// mean flow over the moving support and acceleration sup-norms.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "avflow/constitutive.hpp"
#include "avflow/errors.hpp"
#include "avflow/numerics.hpp"
#include "avflow/particle.hpp"
#include "avflow/profile.hpp"

namespace avflow {

struct Functionals {
  double mass = 0.0;
  double E = 0.0;
  double W = 0.0;
};

struct FunctionalSeries {
  std::string label;
  std::vector<double> t, mass, E, W;

  std::size_t size() const noexcept { return t.size(); }

  void push(double time, const Functionals& f) {
    t.push_back(time);
    mass.push_back(f.mass);
    E.push_back(f.E);
    W.push_back(f.W);
  }

  void validate() const {
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (i > 0 && !(t[i] > t[i - 1])) throw ConfigError("FunctionalSeries: t not increasing");
      if (!std::isfinite(mass[i]) || !std::isfinite(E[i]) || !std::isfinite(W[i])) {
        throw ConfigError("FunctionalSeries: non-finite value");
      }
      if (E[i] < 0.0 || W[i] < 0.0) throw ConfigError("FunctionalSeries: negative functional");
    }
  }
};

// Trapezoid over the samples:
//   m = int rho, E = int rho H(w) + Q(rho), W = 1/2 int (rho beta(w) + P(rho)_x / sigma)^2 / rho
// with P_x by central differences (one-sided at the ends). Vacuum samples
// contribute nothing.
inline Functionals grid_functionals(const GridProfile& g, const Model& m) {
  const std::size_t N = g.size();
  if (N < 3) throw ConfigError("grid_functionals needs at least 3 samples");
  const double sigma = m.params().sigma;
  std::vector<double> P(N), e(N), wi(N);
  for (std::size_t i = 0; i < N; ++i) P[i] = g.rho[i] > 0.0 ? m.P(g.rho[i]) : 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double r = g.rho[i];
    if (!(r > 0.0)) {
      e[i] = 0.0;
      wi[i] = 0.0;
      continue;
    }
    const std::size_t l = i == 0 ? 0 : i - 1;
    const std::size_t h = i + 1 == N ? N - 1 : i + 1;
    const double Px = (P[h] - P[l]) / (g.x[h] - g.x[l]);
    const double w = std::isnan(g.w[i]) ? 0.0 : g.w[i];
    e[i] = r * m.H(w) + m.Q(r);
    const double phi = r * m.beta(w) + Px / sigma;
    wi[i] = 0.5 * phi * phi / r;
  }
  CompensatedSum mass, E, W;
  for (std::size_t i = 1; i < N; ++i) {
    const double dx = 0.5 * (g.x[i] - g.x[i - 1]);
    mass.add(dx * (g.rho[i] + g.rho[i - 1]));
    E.add(dx * (e[i] + e[i - 1]));
    W.add(dx * (wi[i] + wi[i - 1]));
  }
  return {mass.value(), E.value(), W.value()};
}

// The discrete particle functionals, so both kinds of run feed the same series.
inline Functionals particle_functionals(const ParticleSystem& ps, const ParticleState& s) {
  return {ps.total_mass(), ps.energy(s), ps.energy_W(s)};
}

enum class Field { rho, w };

inline const char* field_name(Field f) { return f == Field::rho ? "rho" : "w"; }

// Value of a field at x: rho is 0 outside the support, w is absent there.
inline double field_at(const GridProfile& g, Field f, double x) {
  const bool inside = x >= g.support_lo && x <= g.support_hi && !g.x.empty();
  if (f == Field::rho) {
    if (!inside) return 0.0;
    const double v = profile_value(g, g.rho, x);
    return std::isnan(v) ? 0.0 : v;
  }
  if (!inside) return kAbsent;
  // nearest defined neighbours only, so vacuum cells never leak NaN in
  const auto it = std::upper_bound(g.x.begin(), g.x.end(), x);
  std::size_t j = static_cast<std::size_t>(it - g.x.begin());
  if (j == 0) return std::isnan(g.w.front()) ? kAbsent : g.w.front();
  if (j == g.x.size()) return std::isnan(g.w.back()) ? kAbsent : g.w.back();
  const double wl = g.w[j - 1], wr = g.w[j];
  if (std::isnan(wl) && std::isnan(wr)) return kAbsent;
  if (std::isnan(wl)) return wr;
  if (std::isnan(wr)) return wl;
  const double t = (x - g.x[j - 1]) / (g.x[j] - g.x[j - 1]);
  return wl + t * (wr - wl);
}

// Median spacing of a profile's sample positions.
inline double median_spacing(const GridProfile& g) {
  if (g.size() < 2) return std::numeric_limits<double>::infinity();
  std::vector<double> d;
  for (std::size_t i = 1; i < g.size(); ++i) d.push_back(g.x[i] - g.x[i - 1]);
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2), d.end());
  return d[d.size() / 2];
}

// Uniform comparison grid over the union of the supports.
inline std::vector<double> comparison_grid(const GridProfile& a, const GridProfile& b,
                                           double spacing = 0.0) {
  if (!(spacing > 0.0)) spacing = std::min(median_spacing(a), median_spacing(b));
  if (!std::isfinite(spacing) || !(spacing > 0.0)) throw ConfigError("no usable comparison spacing");
  const double lo = std::min(a.support_lo, b.support_lo);
  const double hi = std::max(a.support_hi, b.support_hi);
  const auto cells = static_cast<std::size_t>(std::ceil((hi - lo) / spacing));
  std::vector<double> xs;
  xs.reserve(cells + 1);
  const std::size_t m = std::max<std::size_t>(cells, 1);
  for (std::size_t k = 0; k <= m; ++k) {
    xs.push_back(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(m));
  }
  return xs;
}

// max |a - b| on the comparison grid. For w, points where either side is
// absent are skipped.
inline double supnorm_diff(const GridProfile& a, const GridProfile& b, Field f,
                           double spacing = 0.0) {
  double out = 0.0;
  for (double x : comparison_grid(a, b, spacing)) {
    const double va = field_at(a, f, x);
    const double vb = field_at(b, f, x);
    if (std::isnan(va) || std::isnan(vb)) continue;
    out = std::max(out, std::abs(va - vb));
  }
  return out;
}

struct DecayFit {
  double slope = 0.0;
  double deviation = 0.0;  // |slope + 2 sigma| / (2 sigma)
  double max_log_error = 0.0;  // max |ln(W/W0) + 2 sigma t| over the window
  double t_last = 0.0;
  std::size_t samples = 0;
};

// Least squares fit of ln W against t over the leading run of samples with
// W > floor W(0).
inline DecayFit decay_fit(std::span<const double> t, std::span<const double> W, double sigma,
                          double floor = 1e-12) {
  if (t.size() != W.size() || t.empty()) throw ConfigError("decay_fit: series sizes differ");
  if (!(W[0] > 0.0)) throw ConfigError("decay_fit: W(0) must be > 0");
  const double thr = floor * W[0];
  std::size_t n = 0;
  while (n < W.size() && W[n] > thr) ++n;
  if (n < 2) throw SolverError("decay_fit: fewer than two samples above the floor");
  double st = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    st += t[i];
    sy += std::log(W[i]);
  }
  const double mt = st / static_cast<double>(n), my = sy / static_cast<double>(n);
  double stt = 0.0, sty = 0.0;
  DecayFit fit;
  for (std::size_t i = 0; i < n; ++i) {
    const double dt = t[i] - mt;
    stt += dt * dt;
    sty += dt * (std::log(W[i]) - my);
    const double e = std::abs(std::log(W[i] / W[0]) + 2.0 * sigma * (t[i] - t[0]));
    fit.max_log_error = std::max(fit.max_log_error, e);
  }
  if (!(stt > 0.0)) throw SolverError("decay_fit: degenerate time samples");
  fit.slope = sty / stt;
  fit.deviation = std::abs(fit.slope + 2.0 * sigma) / (2.0 * sigma);
  fit.samples = n;
  fit.t_last = t[n - 1];
  return fit;
}

// Support [a, b] of samples with rho > threshold and the trapezoid of rho w
// over it, divided by b - a. Profiles hold dimensional (rho~, v~).
inline double support_mean_flow(const GridProfile& g, double threshold) {
  std::size_t first = g.size(), last = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.rho[i] > threshold) {
      first = std::min(first, i);
      last = i;
    }
  }
  if (first >= last) throw SolverError("mean flow: empty support");
  CompensatedSum acc;
  for (std::size_t i = first + 1; i <= last; ++i) {
    const double qa = g.rho[i - 1] * g.w[i - 1];
    const double qb = g.rho[i] * g.w[i];
    acc.add(0.5 * (g.x[i] - g.x[i - 1]) * (qa + qb));
  }
  return acc.value() / (g.x[last] - g.x[first]);
}

// Same mean for a dimensionless profile, without building the dimensional
// copy: rho~ v~ = rho_bar v* rho (1 + w) and dxi = r dx, so the support mean
// only picks up the factor rho_bar v*. `threshold` is in veh/km.
inline double support_mean_flow(const GridProfile& g, double threshold, const DimensionalParams& d) {
  const double thr = threshold / d.rho_bar;
  std::size_t first = g.size(), last = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.rho[i] > thr) {
      first = std::min(first, i);
      last = i;
    }
  }
  if (first >= last) throw SolverError("mean flow: empty support");
  CompensatedSum acc;
  for (std::size_t i = first + 1; i <= last; ++i) {
    const double qa = g.rho[i - 1] * (1.0 + g.w[i - 1]);
    const double qb = g.rho[i] * (1.0 + g.w[i]);
    acc.add(0.5 * (g.x[i] - g.x[i - 1]) * (qa + qb));
  }
  return d.rho_bar * d.v_star * acc.value() / (g.x[last] - g.x[first]);
}

// (1/T) int_0^T [support mean of rho v] dtau, trapezoid in time over the
// profile sample times.
inline double mean_flow(std::span<const GridProfile> series, double T, double threshold) {
  if (series.size() < 2) throw ConfigError("mean flow needs at least two profiles");
  if (!(T > 0.0)) throw ConfigError("mean flow needs T > 0");
  CompensatedSum acc;
  double prev = support_mean_flow(series[0], threshold);
  for (std::size_t k = 1; k < series.size(); ++k) {
    const double cur = support_mean_flow(series[k], threshold);
    acc.add(0.5 * (series[k].t - series[k - 1].t) * (prev + cur));
    prev = cur;
  }
  return acc.value() / T;
}

// Material acceleration w_t + w w_x between two profiles of the same
// units: each sample of b is traced back along its own speed to the time
// of a. Returns max |Dw/Dt| over b's support (0 if nothing overlaps).
inline double accel_supnorm(const GridProfile& a, const GridProfile& b) {
  const double dt = b.t - a.t;
  if (!(dt > 0.0)) throw ConfigError("accel_supnorm needs increasing times");
  double out = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (!(b.rho[i] > 0.0) || std::isnan(b.w[i])) continue;
    const double x0 = b.x[i] - b.w[i] * dt;
    const double w0 = field_at(a, Field::w, x0);
    if (std::isnan(w0)) continue;
    out = std::max(out, std::abs(b.w[i] - w0) / dt);
  }
  return out;
}

// Per-interval acceleration sup-norms, stamped at the later time.
inline std::vector<double> accel_series(std::span<const GridProfile> series) {
  if (series.size() < 2) throw ConfigError("acceleration needs at least two profiles");
  std::vector<double> out;
  for (std::size_t k = 1; k < series.size(); ++k) out.push_back(accel_supnorm(series[k - 1], series[k]));
  return out;
}

}  // namespace avflow
