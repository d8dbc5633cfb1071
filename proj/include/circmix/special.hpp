#ifndef CIRCMIX_SPECIAL_HPP
#define CIRCMIX_SPECIAL_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace circmix::special {

// Ascending power series; all terms are positive so there is no cancellation.
// Stops once a term falls below 1e-16 of the running sum.
inline double bessel_i0(double x) {
  const double q = 0.25 * x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 100000; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < 1e-16 * sum) break;
  }
  return sum;
}

inline double bessel_i1(double x) {
  const double q = 0.25 * x * x;
  double term = 0.5 * x;
  double sum = term;
  if (x == 0.0) return 0.0;
  for (int k = 1; k < 100000; ++k) {
    term *= q / (static_cast<double>(k) * (k + 1));
    sum += term;
    if (term < 1e-16 * sum) break;
  }
  return sum;
}

/// log I0(x), evaluated so that large arguments do not lose the scale.
inline double log_bessel_i0(double x) { return std::log(bessel_i0(x)); }

/// Mean resultant length of a von Mises distribution, A(κ) = I1(κ)/I0(κ).
inline double bessel_ratio(double kappa) {
  if (kappa <= 0.0) return 0.0;
  return bessel_i1(kappa) / bessel_i0(kappa);
}

/// Ratios I_k(κ)/I_0(κ) for k = 1, 2, ... until they drop below `floor`.
/// Uses the backward continued-fraction recurrence r_k = 1 / (2k/κ + r_{k+1}).
inline std::vector<double> bessel_ratio_sequence(double kappa, double floor = 1e-18) {
  std::vector<double> out;
  if (kappa <= 0.0) return out;
  const int start = static_cast<int>(kappa + 40.0 + 12.0 * std::sqrt(kappa));
  std::vector<double> r(static_cast<std::size_t>(start) + 2, 0.0);
  double next = 0.0;
  for (int k = start; k >= 1; --k) {
    next = 1.0 / (2.0 * k / kappa + next);
    r[static_cast<std::size_t>(k)] = next;
  }
  double prod = 1.0;
  for (int k = 1; k <= start; ++k) {
    prod *= r[static_cast<std::size_t>(k)];
    if (prod < floor) break;
    out.push_back(prod);
  }
  return out;
}

/// Inverse of A(κ) by Newton iteration, clamped to [0, kappa_max].
inline double inverse_bessel_ratio(double rbar, double kappa_max, double tol = 1e-10) {
  if (!(rbar > 0.0)) return 0.0;
  if (rbar >= bessel_ratio(kappa_max)) return kappa_max;
  // Best & Fisher starting approximation.
  double kappa;
  if (rbar < 0.53) {
    kappa = 2.0 * rbar + rbar * rbar * rbar + 5.0 * std::pow(rbar, 5) / 6.0;
  } else if (rbar < 0.85) {
    kappa = -0.4 + 1.39 * rbar + 0.43 / (1.0 - rbar);
  } else {
    kappa = 1.0 / (rbar * rbar * rbar - 4.0 * rbar * rbar + 3.0 * rbar);
  }
  kappa = std::clamp(kappa, 1e-12, kappa_max);
  double lo = 0.0;
  double hi = kappa_max;
  for (int it = 0; it < 200; ++it) {
    const double a = bessel_ratio(kappa);
    const double diff = a - rbar;
    if (diff > 0.0) hi = std::min(hi, kappa); else lo = std::max(lo, kappa);
    const double deriv = 1.0 - a / kappa - a * a;
    double next = kappa - diff / deriv;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    if (std::abs(next - kappa) < tol * std::max(1.0, kappa)) return next;
    kappa = next;
  }
  return kappa;
}

}  // namespace circmix::special

#endif  // CIRCMIX_SPECIAL_HPP
