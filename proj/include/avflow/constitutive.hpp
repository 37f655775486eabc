#pragma once

// Model functions of the automated-vehicle traffic fluid, dimensionless form:
//   speed w in (-1, b), density rho in (0, R), particle spacing s > 1/R.
// All members of Model are pure after construction and safe to share
// between threads.

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>

#include "avflow/errors.hpp"

namespace avflow {

struct ModelParams {
  std::size_t n = 225;  // particle / grid count
  double a = 0.4653;    // particle scaling constant
  double b = 0.0606;    // speed range: w in (-1, b)
  double R = 1.9;       // density ratio rho_max / rho_bar
  double sigma = 30.0;  // friction
  double c = 1.0;       // viscosity gain

  void validate() const {
    auto bad = [](const char* what) { throw ConfigError(std::string("ModelParams: ") + what); };
    if (n < 3) bad("n must be >= 3");
    if (!(a > 0.0) || !std::isfinite(a)) bad("a must be > 0");
    if (!(b > 0.0) || !std::isfinite(b)) bad("b must be > 0");
    if (!(R > 1.0) || !std::isfinite(R)) bad("R must be > 1");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) bad("sigma must be > 0");
    if (!(c > 0.0) || !std::isfinite(c)) bad("c must be > 0");
  }
};

// Physical constants of the dimensional model (km, h, veh).
struct DimensionalParams {
  double v_star = 33.0;       // speed set-point (km/h)
  double r = 1.0;             // reference length (km)
  double rho_bar = 63.1579;   // interaction density (veh/km)
  double rho_max = 120.0;     // jam density (veh/km)
  double v_max = 35.0;        // speed limit (km/h)
  double sigma_tilde = 990.0; // friction (1/h)

  double R() const { return rho_max / rho_bar; }
  double b() const { return (v_max - v_star) / v_star; }
  double sigma() const { return r / v_star * sigma_tilde; }

  void validate() const {
    auto bad = [](const char* what) {
      throw ConfigError(std::string("DimensionalParams: ") + what);
    };
    if (!(v_star > 0.0)) bad("v_star must be > 0");
    if (!(v_max > v_star)) bad("v_max must exceed v_star");
    if (!(r > 0.0)) bad("r must be > 0");
    if (!(rho_bar > 0.0)) bad("rho_bar must be > 0");
    if (!(rho_max > rho_bar)) bad("rho_max must exceed rho_bar");
    if (!(sigma_tilde > 0.0)) bad("sigma_tilde must be > 0");
  }
};

// R = rho_max/rho_bar, b = (v_max - v*)/v*, sigma = (r/v*) sigma~.
inline ModelParams to_dimensionless(const DimensionalParams& dp, std::size_t n, double a,
                                    double c = 1.0) {
  dp.validate();
  ModelParams p;
  p.n = n;
  p.a = a;
  p.b = dp.b();
  p.R = dp.R();
  p.sigma = dp.sigma();
  p.c = c;
  p.validate();
  return p;
}

class Model {
 public:
  // Distance kept from the open endpoints of every domain.
  static constexpr double kGuard = 1e-12;

  explicit Model(const ModelParams& p) : p_(p) {
    p_.validate();
    const double D = p_.R - 1.0;
    inv_R_ = 1.0 / p_.R;
    pole_coef_ = D * D / p_.R;
    series_switch_ = 0.1 * std::min(1.0, D);
    // P/(sigma c) = sum_m pc_[m] eps^m, from
    // 1/((1+u)(D-u)) = (1/R) sum_k ((-1)^k + D^-(k+1)) u^k.
    pc_.fill(0.0);
    double dpow = 1.0 / D;
    for (std::size_t k = 0; k + 3 < kTerms; ++k) {
      const double ck = inv_R_ * ((k % 2 == 0 ? 1.0 : -1.0) + dpow);
      pc_[k + 3] = ck / static_cast<double>(k + 3);
      dpow /= D;
    }
    // G/(sigma c) = sum_m gc_[m] eps^m where G = int_1^rho tau^-2 P(tau).
    gc_.fill(0.0);
    for (std::size_t m = 3; m + 1 < kTerms; ++m) {
      double r = 0.0;
      for (std::size_t i = 3; i <= m; ++i) {
        const std::size_t j = m - i;
        r += pc_[i] * (j % 2 == 0 ? 1.0 : -1.0) * static_cast<double>(j + 1);
      }
      gc_[m + 1] = r / static_cast<double>(m + 1);
    }
  }

  const ModelParams& params() const noexcept { return p_; }

  // ---- speed functions -------------------------------------------------

  double q(double w) const {
    check_speed(w, "q");
    const double b = p_.b;
    const double num = 2.0 * b + (b - 1.0) * w;
    const double bw = b - w;
    const double w1 = 1.0 + w;
    return (1.0 + b) * (1.0 + b) * num / (2.0 * bw * bw * w1 * w1);
  }

  double beta(double w) const {
    check_speed(w, "beta");
    return beta_unchecked(w);
  }

  // Kinetic-energy density H(w) = int_0^w s q(s) ds.
  double H(double w) const {
    check_speed(w, "H");
    const double b1 = p_.b + 1.0;
    return w * w * b1 * b1 / (2.0 * (w + 1.0) * (p_.b - w));
  }

  // Inverse of beta: safeguarded Newton inside the bracket (-1, b).
  double beta_inv(double y) const {
    if (!std::isfinite(y)) throw DomainError("beta_inv: non-finite argument");
    if (y == 0.0) return 0.0;
    double lo = -1.0 + kGuard;
    double hi = p_.b - kGuard;
    if (y >= beta_unchecked(hi) || y <= beta_unchecked(lo)) {
      std::ostringstream os;
      os << "beta_inv: |y| = " << y << " beyond the guarded speed range";
      throw DomainError(os.str());
    }
    if (y > 0.0) lo = 0.0; else hi = 0.0;
    const double q0 = (1.0 + p_.b) * (1.0 + p_.b) / p_.b;
    // linear regime; also keeps denormal arguments away from Newton
    if (std::abs(y) < 1e-100) return y / q0;
    double w = std::clamp(y / q0, lo, hi);
    if (w == lo || w == hi) w = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
      const double f = beta_unchecked(w) - y;
      if (f == 0.0 || std::abs(f) <= 1e-15 * std::abs(y)) return w;
      if (f > 0.0) hi = w; else lo = w;
      const double step = f / q_unchecked(w);
      double next = w - step;
      // a Newton step below one ulp lands on w, which is now a bracket end
      if (next == w) return w;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - w) <= 2.0 * std::numeric_limits<double>::epsilon() * std::abs(w) ||
          hi - lo <= 2.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(w))) {
        return next;
      }
      w = next;
    }
    return w;
  }

  // ---- density functions -----------------------------------------------

  double kappa(double rho) const {
    check_density(rho, "kappa");
    if (rho <= 1.0) return 0.0;
    const double e = rho - 1.0;
    return p_.c * e * e / (rho * (p_.R - rho));
  }

  // P(rho) = sigma int_1^rho kappa.
  double P(double rho) const {
    check_density(rho, "P");
    if (rho <= 1.0) return 0.0;
    return p_.sigma * p_.c * pressure_integral(rho - 1.0);
  }

  // Q(rho) = rho int_1^rho tau^-2 P(tau) dtau.
  double Q(double rho) const {
    check_density(rho, "Q");
    if (rho <= 1.0) return 0.0;
    return rho * G(rho);
  }

  // ---- microscopic functions of the spacing s ---------------------------

  // K(s) = (a/s^2) kappa(1/s).
  double K(double s) const {
    check_spacing(s, "K");
    if (s >= 1.0) return 0.0;
    const double rho = 1.0 / s;
    return p_.a * rho * rho * kappa_raw(rho);
  }

  // Phi(s) = s Q(1/s).
  double Phi(double s) const {
    check_spacing(s, "Phi");
    if (s >= 1.0) return 0.0;
    return G(1.0 / s);
  }

  // Phi'(s) = -sigma int_1^{1/s} kappa = -P(1/s).
  double Phi_prime(double s) const {
    check_spacing(s, "Phi_prime");
    if (s >= 1.0) return 0.0;
    return -p_.sigma * p_.c * pressure_integral(1.0 / s - 1.0);
  }

  // Unchecked kernels for solver inner loops whose caller has already
  // validated the state.
  double beta_unchecked(double w) const noexcept {
    const double b = p_.b;
    const double b1 = b + 1.0;
    return 0.5 * b1 *
           (w * b1 / ((w + 1.0) * (b - w)) + std::log1p(w) - std::log1p(-w / b));
  }
  double q_unchecked(double w) const noexcept {
    const double b = p_.b;
    const double bw = b - w;
    const double w1 = 1.0 + w;
    return (1.0 + b) * (1.0 + b) * (2.0 * b + (b - 1.0) * w) / (2.0 * bw * bw * w1 * w1);
  }
  // kappa for rho in [0, R); zero at and below 1 (vacuum included).
  double kappa_raw(double rho) const noexcept {
    if (rho <= 1.0) return 0.0;
    const double e = rho - 1.0;
    return p_.c * e * e / (rho * (p_.R - rho));
  }
  // P for rho in [0, R); zero at and below 1.
  double P_raw(double rho) const noexcept {
    if (rho <= 1.0) return 0.0;
    return p_.sigma * p_.c * pressure_integral(rho - 1.0);
  }

  bool speed_ok(double w) const noexcept {
    return w > -1.0 + kGuard && w < p_.b - kGuard;
  }
  bool density_ok(double rho) const noexcept { return rho > 0.0 && rho < p_.R - kGuard; }

 private:
  static constexpr std::size_t kTerms = 48;

  // int_0^eps u^2/((1+u)(D-u)) du, eps = rho - 1 > 0.
  double pressure_integral(double eps) const noexcept {
    if (eps <= series_switch_) return horner(pc_, eps);
    return -eps + std::log1p(eps) * inv_R_ -
           pole_coef_ * std::log1p(-eps / (p_.R - 1.0));
  }

  // G(rho) / (sigma c) = int_1^rho tau^-2 P(tau) / (sigma c).
  double G(double rho) const noexcept {
    const double eps = rho - 1.0;
    double g;
    if (eps <= series_switch_) {
      g = horner(gc_, eps);
    } else {
      const double L = std::log1p(eps);
      const double f = std::log1p(-eps / (p_.R - 1.0));
      g = (-L + eps / rho) + inv_R_ * (-L / rho + eps / rho) +
          pole_coef_ * (f / rho + (L - f) * inv_R_);
    }
    return p_.sigma * p_.c * g;
  }

  static double horner(const std::array<double, kTerms>& coef, double x) noexcept {
    double acc = 0.0;
    for (std::size_t m = kTerms; m-- > 0;) acc = acc * x + coef[m];
    return acc;
  }

  void check_speed(double w, const char* fn) const {
    if (!speed_ok(w)) {
      std::ostringstream os;
      os << fn << ": speed w = " << w << " outside (-1, " << p_.b << ")";
      throw DomainError(os.str());
    }
  }
  void check_density(double rho, const char* fn) const {
    if (!density_ok(rho)) {
      std::ostringstream os;
      os << fn << ": density rho = " << rho << " outside (0, " << p_.R << ")";
      throw DomainError(os.str());
    }
  }
  void check_spacing(double s, const char* fn) const {
    if (!(s > inv_R_ + kGuard) || !std::isfinite(s)) {
      std::ostringstream os;
      os << fn << ": spacing s = " << s << " not above 1/R = " << inv_R_;
      throw DomainError(os.str());
    }
  }

  ModelParams p_;
  double inv_R_ = 0.0;
  double pole_coef_ = 0.0;  // (R-1)^2 / R
  double series_switch_ = 0.0;
  std::array<double, kTerms> pc_{};
  std::array<double, kTerms> gc_{};
};

// Dimensional functions obtained from the dimensionless ones:
//   q~(v) = q(v/v* - 1), beta~(v) = v* beta(v/v* - 1),
//   kappa~(rho) = r v* kappa(rho/rho_bar), P~(rho) = v*^2 rho_bar P(rho/rho_bar).
class DimensionalModel {
 public:
  DimensionalModel(const DimensionalParams& dp, std::size_t n, double a, double c = 1.0)
      : dp_(dp), model_(to_dimensionless(dp, n, a, c)) {}

  const DimensionalParams& params() const noexcept { return dp_; }
  const Model& model() const noexcept { return model_; }

  double to_w(double v) const noexcept { return (v - dp_.v_star) / dp_.v_star; }
  double to_v(double w) const noexcept { return dp_.v_star * (1.0 + w); }
  double to_rho(double rho_tilde) const noexcept { return rho_tilde / dp_.rho_bar; }
  double to_rho_tilde(double rho) const noexcept { return rho * dp_.rho_bar; }
  // xi = r x + v* tau, t = (v*/r) tau.
  double to_x(double xi, double tau) const noexcept { return (xi - dp_.v_star * tau) / dp_.r; }
  double to_xi(double x, double t) const noexcept { return dp_.r * x + dp_.v_star * to_tau(t); }
  double to_t(double tau) const noexcept { return dp_.v_star / dp_.r * tau; }
  double to_tau(double t) const noexcept { return dp_.r / dp_.v_star * t; }

  double q(double v) const { return model_.q(to_w(v)); }
  double beta(double v) const { return dp_.v_star * model_.beta(to_w(v)); }
  double kappa(double rho_tilde) const {
    return dp_.r * dp_.v_star * model_.kappa(to_rho(rho_tilde));
  }
  double P(double rho_tilde) const {
    return dp_.v_star * dp_.v_star * dp_.rho_bar * model_.P(to_rho(rho_tilde));
  }
  // Vacuum-tolerant versions: rho_tilde in [0, rho_max).
  double kappa_raw(double rho_tilde) const noexcept {
    return dp_.r * dp_.v_star * model_.kappa_raw(to_rho(rho_tilde));
  }
  double P_raw(double rho_tilde) const noexcept {
    return dp_.v_star * dp_.v_star * dp_.rho_bar * model_.P_raw(to_rho(rho_tilde));
  }

 private:
  DimensionalParams dp_;
  Model model_;
};

}  // namespace avflow
