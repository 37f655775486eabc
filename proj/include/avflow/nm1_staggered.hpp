#pragma once

// Staggered upwind scheme on a fixed Eulerian grid: densities at cell
// centers x_j = (i0 + j) dx, speeds at faces x_{j-1/2}. Face j is the left
// face of cell j, so faces run 0..N for N cells. The window is padded by
// vacuum cells and grows when mass approaches its edges; cells outside
// the window are vacuum.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <sstream>
#include <vector>

#include "avflow/constitutive.hpp"
#include "avflow/errors.hpp"
#include "avflow/numerics.hpp"
#include "avflow/profile.hpp"

namespace avflow {

struct Nm1Config {
  double dt = 0.0033;
  double dx = 0.0178;
  std::size_t pad = 8;  // vacuum cells kept on each side

  void validate() const {
    if (!(dt > 0.0) || !(dx > 0.0)) throw ConfigError("Nm1Config: dt and dx must be > 0");
    if (pad < 3) throw ConfigError("Nm1Config: pad must be >= 3");
  }
};

struct StaggeredState {
  std::size_t k = 0;
  double t = 0.0;
  double dx = 0.0;
  long i0 = 0;              // global index of cell 0
  std::vector<double> rho;  // N cells
  std::vector<double> w;    // N + 1 faces

  double center(std::size_t j) const { return static_cast<double>(i0 + static_cast<long>(j)) * dx; }
  double face(std::size_t j) const {
    return (static_cast<double>(i0 + static_cast<long>(j)) - 0.5) * dx;
  }
  double mass() const {
    CompensatedSum m;
    for (double r : rho) m.add(r * dx);
    return m.value();
  }
};

class StaggeredScheme {
 public:
  // Densities below this are flushed to exact vacuum (denormal guard).
  static constexpr double kFlush = 1e-250;

  StaggeredScheme(const Model& model, const Nm1Config& cfg) : m_(model), cfg_(cfg) {
    cfg_.validate();
  }

  const Nm1Config& config() const noexcept { return cfg_; }
  const Model& model() const noexcept { return m_; }

  // Cell averages of rho over [x_{j-1/2}, x_{j+1/2}] and of w over the
  // interval between the two centers adjacent to each face.
  StaggeredState init(const Profile& rho0, const Profile& w0) const {
    const double dx = cfg_.dx;
    StaggeredState s;
    s.dx = dx;
    const long lo = static_cast<long>(std::floor(rho0.lo / dx + 0.5)) - static_cast<long>(cfg_.pad);
    const long hi = static_cast<long>(std::ceil(rho0.hi / dx - 0.5)) + static_cast<long>(cfg_.pad);
    s.i0 = lo;
    const std::size_t N = static_cast<std::size_t>(hi - lo + 1);
    s.rho.resize(N);
    s.w.resize(N + 1);
    for (std::size_t j = 0; j < N; ++j) {
      const double c = s.center(j);
      s.rho[j] = rho0.integral(c - 0.5 * dx, c + 0.5 * dx) / dx;
    }
    for (std::size_t j = 0; j <= N; ++j) {
      const double f = s.face(j);
      s.w[j] = w0.integral(f - 0.5 * dx, f + 0.5 * dx) / dx;
    }
    return s;
  }

  // Upwind face fluxes G_j for the current state (faces 0..N).
  void face_fluxes(const StaggeredState& s, std::vector<double>& G) const {
    const std::size_t N = s.rho.size();
    G.assign(N + 1, 0.0);
    for (std::size_t j = 0; j <= N; ++j) {
      const double rl = j > 0 ? s.rho[j - 1] : 0.0;
      const double rr = j < N ? s.rho[j] : 0.0;
      const double v = s.w[j];
      G[j] = 0.5 * (v + std::abs(v)) * rl + 0.5 * (v - std::abs(v)) * rr;
    }
  }

  // rho_j += dt/dx (G_j - G_{j+1}).
  std::vector<double> mass_step(const StaggeredState& s, const std::vector<double>& G,
                                double dt) const {
    const std::size_t N = s.rho.size();
    const double lam = dt / s.dx;
    std::vector<double> out(N);
    for (std::size_t j = 0; j < N; ++j) {
      double r = s.rho[j] + lam * (G[j] - G[j + 1]);
      if (r < 0.0) {
        std::ostringstream os;
        os << "negative density " << r << " at x = " << s.center(j) << " (CFL violated?)";
        throw StateSpaceError(os.str(), j);
      }
      if (r < kFlush) r = 0.0;
      out[j] = r;
    }
    return out;
  }

  // Face speeds at k+1 from the old state, its fluxes and the new densities.
  std::vector<double> momentum_step(const StaggeredState& s, const std::vector<double>& G,
                                    const std::vector<double>& rho_new, double dt) const {
    const std::size_t N = s.rho.size();
    const double lam = dt / s.dx;
    const double inv_dx = 1.0 / s.dx;
    const double fric = 1.0 / (1.0 + m_.params().sigma * dt);

    // cell quantities: Gc beta_hat at k, P and rho kappa at k+1
    std::vector<double> gb(N), pn(N), rk(N), beta_face(N + 1);
    for (std::size_t j = 0; j <= N; ++j) beta_face[j] = m_.beta(s.w[j]);
    for (std::size_t j = 0; j < N; ++j) {
      const double gc = 0.5 * (G[j] + G[j + 1]);
      gb[j] = gc * (gc >= 0.0 ? beta_face[j] : beta_face[j + 1]);
      const double r = rho_new[j];
      if (!(r < m_.params().R - Model::kGuard)) {
        std::ostringstream os;
        os << "density " << r << " reached R at x = " << s.center(j);
        throw StateSpaceError(os.str(), j);
      }
      pn[j] = m_.P_raw(r);
      rk[j] = r * m_.kappa_raw(r);
    }
    auto cell = [N](const std::vector<double>& v, std::ptrdiff_t j) {
      return (j < 0 || j >= static_cast<std::ptrdiff_t>(N)) ? 0.0 : v[static_cast<std::size_t>(j)];
    };
    auto face = [&](std::ptrdiff_t j) {
      return (j < 0 || j > static_cast<std::ptrdiff_t>(N)) ? 0.0 : s.w[static_cast<std::size_t>(j)];
    };

    std::vector<double> w_new(N + 1, 0.0);
    for (std::size_t jj = 0; jj <= N; ++jj) {
      const auto j = static_cast<std::ptrdiff_t>(jj);
      const double rf_new = 0.5 * (cell(rho_new, j - 1) + cell(rho_new, j));
      if (!(rf_new > 0.0)) continue;  // vacuum face: w = 0
      const double rf_old = 0.5 * (cell(s.rho, j - 1) + cell(s.rho, j));
      const double explicit_part =
          rf_old * beta_face[jj] +
          lam * (cell(pn, j - 1) - cell(pn, j) + cell(gb, j - 1) - cell(gb, j));
      const double visc = lam * inv_dx *
                          (cell(rk, j) * (face(j + 1) - face(j)) -
                           cell(rk, j - 1) * (face(j) - face(j - 1)));
      const double mom = fric * explicit_part + visc;
      const double w = m_.beta_inv(mom / rf_new);
      w_new[jj] = std::abs(w) < kFlush ? 0.0 : w;
    }
    return w_new;
  }

  // One full step of size dt (dt <= cfg.dt when clipping to output times).
  void step(StaggeredState& s, double dt) const {
    std::vector<double> G;
    face_fluxes(s, G);
    std::vector<double> rho_new = mass_step(s, G, dt);
    std::vector<double> w_new = momentum_step(s, G, rho_new, dt);
    s.rho = std::move(rho_new);
    s.w = std::move(w_new);
    s.t += dt;
    ++s.k;
    ensure_padding(s);
  }
  void step(StaggeredState& s) const { step(s, cfg_.dt); }

  // Advances to t_end; observer(state, is_output) fires after every step
  // and at the start. Steps are shortened to land on output times.
  template <class Observer>
  void run(StaggeredState& s, double t_end, std::span<const double> outputs,
           Observer&& observer) const {
    std::vector<double> targets;
    for (double o : outputs) {
      if (o > s.t && o < t_end) targets.push_back(o);
    }
    std::sort(targets.begin(), targets.end());
    targets.push_back(t_end);
    observer(static_cast<const StaggeredState&>(s),
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
      observer(static_cast<const StaggeredState&>(s), landed);
    }
  }

  // Cell-center profile; w at a center is the mean of its two faces.
  GridProfile profile(const StaggeredState& s) const {
    GridProfile g;
    g.t = s.t;
    const std::size_t N = s.rho.size();
    std::size_t first = N, last = 0;
    for (std::size_t j = 0; j < N; ++j) {
      if (s.rho[j] > 0.0) {
        first = std::min(first, j);
        last = j;
      }
    }
    for (std::size_t j = 0; j < N; ++j) {
      g.x.push_back(s.center(j));
      g.rho.push_back(s.rho[j]);
      g.w.push_back(s.rho[j] > 0.0 ? 0.5 * (s.w[j] + s.w[j + 1]) : kAbsent);
    }
    if (first < N) {
      g.support_lo = s.face(first);
      g.support_hi = s.face(last + 1);
    }
    return g;
  }

  double max_cfl(const StaggeredState& s, double dt) const {
    double m = 0.0;
    for (double v : s.w) m = std::max(m, std::abs(v));
    return m * dt / s.dx;
  }

 private:
  void ensure_padding(StaggeredState& s) const {
    const std::size_t N = s.rho.size();
    const std::size_t guard = cfg_.pad / 2;
    std::size_t first = N, last = 0;
    for (std::size_t j = 0; j < N; ++j) {
      if (s.rho[j] > 0.0) {
        first = std::min(first, j);
        last = j;
      }
    }
    if (first == N) return;
    if (first < guard) {
      const std::size_t add = cfg_.pad;
      s.rho.insert(s.rho.begin(), add, 0.0);
      s.w.insert(s.w.begin(), add, 0.0);
      s.i0 -= static_cast<long>(add);
    }
    if (last + guard >= N) {
      const std::size_t add = cfg_.pad;
      s.rho.insert(s.rho.end(), add, 0.0);
      s.w.insert(s.w.end(), add, 0.0);
    }
  }

  Model m_;
  Nm1Config cfg_;
};

}  // namespace avflow
