#pragma once

// Reference values by adaptive quadrature of the defining integrals, kept
// apart from the closed forms under test.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>

namespace oracle {

template <class F>
double quad(F f, double a, double b) {
  if (a == b) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 8, 1e-13);
}

// q(w) written directly from the speed-domain definition.
inline double q(double w, double b) {
  return (1.0 + b) * (1.0 + b) * (2.0 * b + (b - 1.0) * w) /
         (2.0 * (b - w) * (b - w) * (1.0 + w) * (1.0 + w));
}
inline double beta(double w, double b) {
  return quad([b](double s) { return q(s, b); }, 0.0, w);
}
inline double H(double w, double b) {
  return quad([b](double s) { return s * q(s, b); }, 0.0, w);
}
inline double kappa(double rho, double R, double c) {
  return rho <= 1.0 ? 0.0 : c * (rho - 1.0) * (rho - 1.0) / (rho * (R - rho));
}
inline double P(double rho, double R, double sigma, double c) {
  if (rho <= 1.0) return 0.0;
  return sigma * quad([=](double t) { return kappa(t, R, c); }, 1.0, rho);
}
inline double Q(double rho, double R, double sigma, double c) {
  if (rho <= 1.0) return 0.0;
  return rho * quad([=](double t) { return P(t, R, sigma, c) / (t * t); }, 1.0, rho);
}

}  // namespace oracle
