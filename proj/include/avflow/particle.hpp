#pragma once

// Particle method: n ordered particles x_1 > x_2 > ... > x_n with speeds
// w_i. Gap i (i = 2..n) sits between particles i-1 and i. The packed ODE
// state is [x_1..x_n, w_1..w_n].

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

struct ParticleState {
  double t = 0.0;
  std::vector<double> x;  // strictly decreasing
  std::vector<double> w;

  std::size_t size() const noexcept { return x.size(); }

  std::vector<double> pack() const {
    std::vector<double> y(x);
    y.insert(y.end(), w.begin(), w.end());
    return y;
  }
  static ParticleState unpack(double t, std::span<const double> y) {
    const std::size_t n = y.size() / 2;
    ParticleState s;
    s.t = t;
    s.x.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n));
    s.w.assign(y.begin() + static_cast<std::ptrdiff_t>(n), y.end());
    return s;
  }
};

class ParticleSystem {
 public:
  explicit ParticleSystem(const Model& model)
      : m_(model),
        n_(model.params().n),
        na_(static_cast<double>(model.params().n) * model.params().a),
        min_ns_(1.0 / model.params().R + Model::kGuard) {}

  const Model& model() const noexcept { return m_; }
  std::size_t n() const noexcept { return n_; }
  double na() const noexcept { return na_; }

  // (n-1)/(na): every gap carries mass 1/(na).
  double total_mass() const noexcept { return static_cast<double>(n_ - 1) / na_; }

  // Throws StateSpaceError (0-based index) unless (x, w) lies in Omega_n.
  void check(std::span<const double> x, std::span<const double> w) const {
    if (x.size() != n_ || w.size() != n_) throw ConfigError("particle state has wrong size");
    for (std::size_t i = 0; i < n_; ++i) {
      if (!m_.speed_ok(w[i])) {
        std::ostringstream os;
        os << "particle speed w = " << w[i] << " outside (-1, b)";
        throw StateSpaceError(os.str(), i);
      }
      if (i > 0 && !(na_ * (x[i - 1] - x[i]) > min_ns_)) {
        std::ostringstream os;
        os << "particle gap n*a*s = " << na_ * (x[i - 1] - x[i]) << " not above 1/R";
        throw StateSpaceError(os.str(), i);
      }
    }
  }
  void check(const ParticleState& s) const { check(s.x, s.w); }

  // dy = [dx, dw] for y = [x, w].
  void rhs(std::span<const double> y, std::span<double> dy) const {
    const auto x = y.subspan(0, n_);
    const auto w = y.subspan(n_, n_);
    check(x, w);
    auto dx = dy.subspan(0, n_);
    auto dw = dy.subspan(n_, n_);
    const double sigma = m_.params().sigma;
    // n^2 a K(n a s) = n^2 a^2 rho^2 kappa(rho)
    const double ka = static_cast<double>(n_) * static_cast<double>(n_) * m_.params().a * m_.params().a;
    for (std::size_t i = 0; i < n_; ++i) {
      dx[i] = w[i];
      dw[i] = -sigma * m_.beta_unchecked(w[i]);
    }
    for (std::size_t j = 1; j < n_; ++j) {
      const double rho = 1.0 / (na_ * (x[j - 1] - x[j]));
      if (rho <= 1.0) continue;
      const double fp = na_ * m_.P_raw(rho);                                   // -na Phi'
      const double fk = ka * rho * rho * m_.kappa_raw(rho);
      const double visc = fk * (w[j - 1] - w[j]);
      dw[j - 1] += fp - visc;
      dw[j] += -fp + visc;
    }
    for (std::size_t i = 0; i < n_; ++i) dw[i] /= m_.q_unchecked(w[i]);
  }
  void operator()(double, std::span<const double> y, std::span<double> dy) const { rhs(y, dy); }

  // E_n = (1/na) [sum H(w_i) + sum Phi(n a s_i)].
  double energy(const ParticleState& s) const {
    check(s);
    CompensatedSum acc;
    for (std::size_t i = 0; i < n_; ++i) acc.add(m_.H(s.w[i]));
    for (std::size_t j = 1; j < n_; ++j) acc.add(m_.Phi(na_ * (s.x[j - 1] - s.x[j])));
    return acc.value() / na_;
  }

  // Right side of the energy identity:
  //   -n sum K(n a s_i)(w_{i-1} - w_i)^2 - (sigma/na) sum w_i beta(w_i).
  double energy_rate(const ParticleState& s) const {
    check(s);
    CompensatedSum visc;
    for (std::size_t j = 1; j < n_; ++j) {
      const double dw = s.w[j - 1] - s.w[j];
      visc.add(m_.K(na_ * (s.x[j - 1] - s.x[j])) * dw * dw);
    }
    CompensatedSum fric;
    for (std::size_t i = 0; i < n_; ++i) fric.add(s.w[i] * m_.beta(s.w[i]));
    return -static_cast<double>(n_) * visc.value() - m_.params().sigma / na_ * fric.value();
  }

  // phi_i for the 1-based index i in 2..n-1.
  double phi(const ParticleState& s, std::size_t i) const {
    if (i < 2 || i + 1 > n_) throw ConfigError("phi_i needs 2 <= i <= n-1");
    const std::size_t k = i - 1;  // 0-based
    const double ahead = m_.Phi_prime(na_ * (s.x[k - 1] - s.x[k]));
    const double behind = m_.Phi_prime(na_ * (s.x[k] - s.x[k + 1]));
    return m_.beta(s.w[k]) + na_ / m_.params().sigma * (behind - ahead);
  }

  // W_n = (1/(2na)) sum_{i=2}^{n-1} phi_i^2, summed left to right.
  double energy_W(const ParticleState& s) const {
    check(s);
    CompensatedSum acc;
    for (std::size_t i = 2; i + 1 <= n_; ++i) {
      const double p = phi(s, i);
      acc.add(p * p);
    }
    return acc.value() / (2.0 * na_);
  }

  // rho_i = 1/(na s_i) for i >= 2 and rho_1 = rho_2, in particle order.
  std::vector<double> densities(const ParticleState& s) const {
    std::vector<double> rho(n_);
    for (std::size_t j = 1; j < n_; ++j) rho[j] = 1.0 / (na_ * (s.x[j - 1] - s.x[j]));
    rho[0] = rho[1];
    return rho;
  }

  // Nodal profile in increasing x (x_n first); support [x_n, x_1].
  GridProfile profile(const ParticleState& s) const {
    const auto rho = densities(s);
    GridProfile g;
    g.t = s.t;
    g.x.assign(s.x.rbegin(), s.x.rend());
    g.rho.assign(rho.rbegin(), rho.rend());
    g.w.assign(s.w.rbegin(), s.w.rend());
    g.support_lo = s.x.back();
    g.support_hi = s.x.front();
    return g;
  }

  // Piecewise-linear reconstruction at increasing query points. Outside
  // [x_n, x_1]: rho = 0, w absent.
  GridProfile reconstruct(const ParticleState& s, std::span<const double> query) const {
    const GridProfile nodes = profile(s);
    GridProfile g;
    g.t = s.t;
    g.support_lo = nodes.support_lo;
    g.support_hi = nodes.support_hi;
    for (double q : query) {
      g.x.push_back(q);
      if (q < nodes.support_lo || q > nodes.support_hi) {
        g.rho.push_back(0.0);
        g.w.push_back(kAbsent);
      } else {
        g.rho.push_back(interp_linear(nodes.x, nodes.rho, q));
        g.w.push_back(interp_linear(nodes.x, nodes.w, q));
      }
    }
    return g;
  }

 private:
  Model m_;
  std::size_t n_;
  double na_;
  double min_ns_;
};

}  // namespace avflow
