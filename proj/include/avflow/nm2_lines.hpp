#pragma once

// Method of lines in the Lagrangian mass coordinate s in (0, m~), in the
// physical units of the original model (km, h, veh).
//
// Layout: nodes 0..2n at mass k ds/2. Densities live on even nodes
// (rho~_0 = rho~_2n = 0), speeds on odd nodes with ghosts v~_{-1} =
// v~_{2n+1} = v*. The ODE state is
//   [rho~_2, rho~_4, ..., rho~_2n, v~_1, v~_3, ..., v~_{2n-1}].

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <vector>

#include "avflow/constitutive.hpp"
#include "avflow/errors.hpp"
#include "avflow/profile.hpp"
#include "avflow/stepper.hpp"

namespace avflow {

struct LagrangianState {
  double h = 0.0;                 // hours
  std::vector<double> rho_even;   // rho~_{2i}, i = 1..n
  std::vector<double> v_odd;      // v~_{2i-1}, i = 1..n
  double m_tilde = 0.0;
  double ds = 0.0;

  std::vector<double> pack() const {
    std::vector<double> y(rho_even);
    y.insert(y.end(), v_odd.begin(), v_odd.end());
    return y;
  }
};

// Samples dimensional initial data at the mass coordinates:
// rho~_{2i}(0) = rho~_0(xi(i ds)), v~_{2i-1}(0) = v~_0(xi((i - 1/2) ds)).
inline LagrangianState to_lagrangian(const Profile& rho0, const Profile& v0, std::size_t n) {
  if (n < 2) throw ConfigError("method of lines needs n >= 2");
  const CumulativeMass cm(rho0);
  LagrangianState s;
  s.m_tilde = cm.total();
  s.ds = s.m_tilde / static_cast<double>(n);
  for (std::size_t i = 1; i <= n; ++i) {
    const double xi_even = cm.inverse(static_cast<double>(i) * s.ds);
    const double xi_odd = cm.inverse((static_cast<double>(i) - 0.5) * s.ds);
    s.rho_even.push_back(i == n ? 0.0 : rho0(xi_even));
    s.v_odd.push_back(v0(xi_odd));
  }
  return s;
}

// Eulerian positions xi of the even nodes (masses i ds, i = 0..n).
inline std::vector<double> initial_nodes(const Profile& rho0, std::size_t n) {
  const CumulativeMass cm(rho0);
  const double ds = cm.total() / static_cast<double>(n);
  std::vector<double> xi(n + 1);
  for (std::size_t i = 0; i <= n; ++i) xi[i] = cm.inverse(static_cast<double>(i) * ds);
  return xi;
}

class MethodOfLines {
 public:
  MethodOfLines(const DimensionalModel& dm, std::size_t n, double ds) : dm_(dm), n_(n), ds_(ds) {
    if (n < 2) throw ConfigError("method of lines needs n >= 2");
    if (!(ds > 0.0)) throw ConfigError("method of lines needs ds > 0");
  }

  std::size_t n() const noexcept { return n_; }
  double ds() const noexcept { return ds_; }
  const DimensionalModel& dimensional() const noexcept { return dm_; }

  void check(std::span<const double> y) const {
    const auto& p = dm_.params();
    for (std::size_t i = 0; i < n_; ++i) {
      const double r = y[i];
      if (!(r >= 0.0 && r < p.rho_max * (1.0 - Model::kGuard))) {
        std::ostringstream os;
        os << "density rho~ = " << r << " outside [0, rho_max)";
        throw StateSpaceError(os.str(), i);
      }
      const double v = y[n_ + i];
      if (!dm_.model().speed_ok(dm_.to_w(v))) {
        std::ostringstream os;
        os << "speed v~ = " << v << " outside (0, v_max)";
        throw StateSpaceError(os.str(), n_ + i);
      }
    }
  }

  void rhs(std::span<const double> y, std::span<double> dy) const {
    check(y);
    const auto& p = dm_.params();
    const Model& m = dm_.model();
    const double vs = p.v_star;
    const double inv_ds = 1.0 / ds_;
    const double inv_ds2 = inv_ds * inv_ds;
    const double sig = p.sigma_tilde;
    auto rho = [&](std::size_t i) { return i == 0 ? 0.0 : y[i - 1]; };  // rho~_{2i}
    auto v = [&](std::ptrdiff_t i) {                                        // v~_{2i-1}
      return (i < 1 || i > static_cast<std::ptrdiff_t>(n_)) ? vs
                                                             : y[n_ + static_cast<std::size_t>(i) - 1];
    };
    // G_{2i} = rho~^2 kappa~ and P~(rho~_{2i}); both vanish at i = 0.
    double g_prev = 0.0, p_prev = 0.0;
    for (std::size_t i = 1; i <= n_; ++i) {
      const auto ii = static_cast<std::ptrdiff_t>(i);
      const double r = rho(i);
      double g = 0.0, pr = 0.0;
      if (r > p.rho_bar) {
        g = r * r * dm_.kappa_raw(r);
        pr = dm_.P_raw(r);
      }
      dy[i - 1] = -r * r * (v(ii + 1) - v(ii)) * inv_ds;
      const double vi = v(ii);
      const double w = (vi - vs) / vs;
      const double visc = g * (v(ii + 1) - vi) - g_prev * (vi - v(ii - 1));
      const double rate = -(pr - p_prev) * inv_ds + visc * inv_ds2 - sig * vs * m.beta_unchecked(w);
      dy[n_ + i - 1] = rate / m.q_unchecked(w);
      g_prev = g;
      p_prev = pr;
    }
  }
  void operator()(double, std::span<const double> y, std::span<double> dy) const { rhs(y, dy); }

  // Speed at even node 2i, i = 0..n: mean of the neighbouring odd speeds.
  std::vector<double> node_speeds(std::span<const double> y) const {
    const double vs = dm_.params().v_star;
    std::vector<double> out(n_ + 1);
    for (std::size_t i = 0; i <= n_; ++i) {
      const double left = i == 0 ? vs : y[n_ + i - 1];
      const double right = i == n_ ? vs : y[n_ + i];
      out[i] = 0.5 * (left + right);
    }
    return out;
  }

  // Dimensionless Eulerian profile at dimensional time h from node
  // positions xi (i = 0..n) and the state.
  GridProfile eulerian(double h, std::span<const double> xi, std::span<const double> y) const {
    const auto& p = dm_.params();
    const auto vn = node_speeds(y);
    GridProfile g;
    g.t = dm_.to_t(h);
    for (std::size_t i = 0; i <= n_; ++i) {
      g.x.push_back(dm_.to_x(xi[i], h));
      const double r = (i == 0) ? 0.0 : y[i - 1];
      g.rho.push_back(r / p.rho_bar);
      g.w.push_back(dm_.to_w(vn[i]));
    }
    g.support_lo = g.x.front();
    g.support_hi = g.x.back();
    return g;
  }

 private:
  DimensionalModel dm_;
  std::size_t n_;
  double ds_;
};

// Trapezoidal integration of node positions along accepted steps.
class NodeTracker {
 public:
  NodeTracker(const MethodOfLines& mol, std::vector<double> xi0, std::span<const double> y0,
              double h0)
      : mol_(mol), xi_(std::move(xi0)), v_(mol.node_speeds(y0)), h_(h0) {}

  void advance(double h, std::span<const double> y) {
    const auto v_new = mol_.node_speeds(y);
    const double dh = h - h_;
    for (std::size_t i = 0; i < xi_.size(); ++i) xi_[i] += 0.5 * dh * (v_[i] + v_new[i]);
    for (std::size_t i = 1; i < xi_.size(); ++i) {
      if (!(xi_[i] > xi_[i - 1])) {
        throw StateSpaceError("Eulerian node ordering violated", i);
      }
    }
    v_ = v_new;
    h_ = h;
  }

  const std::vector<double>& positions() const noexcept { return xi_; }

 private:
  const MethodOfLines& mol_;
  std::vector<double> xi_;
  std::vector<double> v_;
  double h_;
};

}  // namespace avflow
