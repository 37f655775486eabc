#pragma once

// Small numerical helpers shared by the solvers: compensated summation,
// fixed-order Gauss-Legendre panels, piecewise-linear interpolation.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace avflow {

// Neumaier's variant of Kahan summation. Order of add() calls is the
// reduction order, so results are reproducible for a fixed input order.
class CompensatedSum {
 public:
  void add(double v) noexcept {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

namespace detail {
// 8-point Gauss-Legendre nodes/weights on [-1, 1].
inline constexpr std::array<double, 8> kGLNodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
    -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
    0.7966664774136267,  0.9602898564975363};
inline constexpr std::array<double, 8> kGLWeights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
    0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
    0.2223810344533745, 0.1012285362903763};
}  // namespace detail

// One 8-point Gauss-Legendre panel; exact for polynomials of degree <= 15.
template <class F>
double gauss_legendre(F&& f, double lo, double hi) {
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  double acc = 0.0;
  for (std::size_t k = 0; k < detail::kGLNodes.size(); ++k) {
    acc += detail::kGLWeights[k] * f(mid + half * detail::kGLNodes[k]);
  }
  return acc * half;
}

// Composite Gauss-Legendre over [lo, hi] with `panels` equal panels, split
// additionally at any `breaks` inside the interval (kinks of the integrand).
template <class F>
double integrate(F&& f, double lo, double hi, std::span<const double> breaks = {},
                 int panels = 4) {
  if (!(hi > lo)) return 0.0;
  std::vector<double> cuts{lo};
  for (double b : breaks) {
    if (b > lo && b < hi) cuts.push_back(b);
  }
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  CompensatedSum total;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double a = cuts[c];
    const double h = (cuts[c + 1] - a) / panels;
    for (int p = 0; p < panels; ++p) {
      total.add(gauss_legendre(f, a + p * h, p + 1 == panels ? cuts[c + 1] : a + (p + 1) * h));
    }
  }
  return total.value();
}

// Linear interpolation in a table with strictly increasing `xs`. Returns
// the end value outside [xs.front(), xs.back()].
inline double interp_linear(std::span<const double> xs, std::span<const double> ys,
                            double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t j = static_cast<std::size_t>(it - xs.begin());
  const double t = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
  return ys[j - 1] + t * (ys[j] - ys[j - 1]);
}

// sgn with sgn(0) = 0.
inline int sign_of(double v) noexcept { return (v > 0.0) - (v < 0.0); }

// Median of a non-empty sample (mean of the middle pair for even sizes).
inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t h = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h), v.end());
  if (v.size() % 2 == 1) return v[h];
  const double hi = v[h];
  return 0.5 * (*std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h)) + hi);
}

}  // namespace avflow
