#pragma once

// Initial-data profiles and Eulerian sample sets.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "avflow/errors.hpp"
#include "avflow/numerics.hpp"

namespace avflow {

inline constexpr double kAbsent = std::numeric_limits<double>::quiet_NaN();

// Eulerian samples (x, rho, w) at one time. w is NaN where it is undefined
// (outside the support of the density).
struct GridProfile {
  double t = 0.0;
  std::vector<double> x;
  std::vector<double> rho;
  std::vector<double> w;
  double support_lo = 0.0;
  double support_hi = 0.0;

  std::size_t size() const noexcept { return x.size(); }

  void validate() const {
    if (rho.size() != x.size() || w.size() != x.size()) {
      throw ConfigError("GridProfile: x, rho, w lengths differ");
    }
    for (std::size_t i = 1; i < x.size(); ++i) {
      if (!(x[i] > x[i - 1])) throw ConfigError("GridProfile: x not strictly increasing");
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!(rho[i] >= 0.0)) throw ConfigError("GridProfile: negative density");
      if (rho[i] > 0.0 && (x[i] < support_lo || x[i] > support_hi)) {
        throw ConfigError("GridProfile: mass outside the declared support");
      }
    }
  }
};

// A scalar profile on (lo, hi); zero outside. `breaks` lists kinks so
// quadrature can split there.
struct Profile {
  std::function<double(double)> f;
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> breaks;

  double operator()(double x) const {
    if (x <= lo || x >= hi) return 0.0;
    return f(x);
  }

  double integral(double a, double b, int panels = 8) const {
    a = std::max(a, lo);
    b = std::min(b, hi);
    if (!(b > a)) return 0.0;
    return integrate([this](double x) { return (*this)(x); }, a, b, breaks, panels);
  }
  double mass(int panels = 64) const { return integral(lo, hi, panels); }

  static Profile constant(double value, double lo, double hi) {
    return Profile{[value](double) { return value; }, lo, hi, {}};
  }

  // amp (x - lo)^2 (x - hi)^2 on (lo, hi).
  static Profile quartic_bump(double amp, double lo, double hi) {
    return Profile{[=](double x) {
                     const double u = (x - lo) * (x - hi);
                     return amp * u * u;
                   },
                   lo, hi, {}};
  }

  // Piecewise-linear through (xs, ys); zero outside [xs.front(), xs.back()].
  static Profile table(std::vector<double> xs, std::vector<double> ys) {
    if (xs.size() < 2 || xs.size() != ys.size()) {
      throw ConfigError("table profile needs >= 2 (x, value) rows of equal length");
    }
    for (std::size_t i = 1; i < xs.size(); ++i) {
      if (!(xs[i] > xs[i - 1])) throw ConfigError("table profile x must increase strictly");
    }
    const double lo = xs.front();
    const double hi = xs.back();
    std::vector<double> br(xs.begin() + 1, xs.end() - 1);
    auto data = std::make_shared<std::pair<std::vector<double>, std::vector<double>>>(
        std::move(xs), std::move(ys));
    return Profile{[data](double x) { return interp_linear(data->first, data->second, x); },
                   lo, hi, std::move(br)};
  }
};

// Inverse of the cumulative mass M(x) = int_lo^x rho. Precomputes M on a
// fine panel grid, then bisects inside one panel to `tol` in mass.
class CumulativeMass {
 public:
  explicit CumulativeMass(const Profile& rho, std::size_t panels = 2048, double tol = 1e-12)
      : rho_(rho), tol_(tol) {
    std::vector<double> cuts;
    for (std::size_t k = 0; k <= panels; ++k) {
      cuts.push_back(rho.lo + (rho.hi - rho.lo) * static_cast<double>(k) /
                                  static_cast<double>(panels));
    }
    for (double b : rho.breaks) {
      if (b > rho.lo && b < rho.hi) cuts.push_back(b);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    nodes_ = std::move(cuts);
    cum_.assign(nodes_.size(), 0.0);
    CompensatedSum acc;
    for (std::size_t k = 1; k < nodes_.size(); ++k) {
      acc.add(gauss_legendre(rho_, nodes_[k - 1], nodes_[k]));
      cum_[k] = acc.value();
    }
    if (!(total() > 0.0)) throw ConfigError("density profile has zero mass");
  }

  double total() const noexcept { return cum_.back(); }

  double mass_below(double x) const {
    if (x <= nodes_.front()) return 0.0;
    if (x >= nodes_.back()) return total();
    const std::size_t j = panel_of(x);
    return cum_[j] + gauss_legendre(rho_, nodes_[j], x);
  }

  // x with M(x) = m.
  double inverse(double m) const {
    if (m <= 0.0) return nodes_.front();
    if (m >= total()) return nodes_.back();
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), m);
    std::size_t j = static_cast<std::size_t>(it - cum_.begin());
    j = std::clamp<std::size_t>(j, 1, nodes_.size() - 1) - 1;
    double lo = nodes_[j];
    double hi = nodes_[j + 1];
    for (int it2 = 0; it2 < 200; ++it2) {
      const double mid = 0.5 * (lo + hi);
      const double mm = cum_[j] + gauss_legendre(rho_, nodes_[j], mid);
      if (std::abs(mm - m) <= tol_ || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() *
                                                  std::max(1.0, std::abs(mid))) {
        return mid;
      }
      if (mm < m) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
  }

 private:
  std::size_t panel_of(double x) const {
    const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
    return static_cast<std::size_t>(it - nodes_.begin()) - 1;
  }

  Profile rho_;
  double tol_;
  std::vector<double> nodes_;
  std::vector<double> cum_;
};

// Samples a profile pair on increasing x; w is absent where rho == 0.
inline GridProfile sample_profile(const Profile& rho, const Profile& w, std::span<const double> xs,
                                  double t = 0.0) {
  GridProfile g;
  g.t = t;
  g.support_lo = rho.lo;
  g.support_hi = rho.hi;
  for (double x : xs) {
    const double r = rho(x);
    g.x.push_back(x);
    g.rho.push_back(r);
    g.w.push_back(r > 0.0 ? w(x) : kAbsent);
  }
  return g;
}

// Linear interpolation of one field of a profile; absent outside support.
inline double profile_value(const GridProfile& g, const std::vector<double>& field, double x) {
  if (g.x.empty() || x < g.x.front() || x > g.x.back()) return kAbsent;
  return interp_linear(g.x, field, x);
}

}  // namespace avflow
