#ifndef CIRCMIX_DIRECTIONAL_HPP
#define CIRCMIX_DIRECTIONAL_HPP

// Univariate circular (period 2π) and axial (period π) densities: von Mises and
// wrapped Cauchy, each in a circular and an axial form.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "circmix/angles.hpp"
#include "circmix/errors.hpp"
#include "circmix/optimize.hpp"
#include "circmix/random.hpp"
#include "circmix/special.hpp"

namespace circmix {

enum class Family { VMcirc, WCcirc, VMax, WCax };

inline constexpr double kVonMisesKappaMax = 500.0;
inline constexpr double kWrappedCauchyKappaMax = 1.0 - 1e-6;

constexpr bool is_circular(Family f) { return f == Family::VMcirc || f == Family::WCcirc; }
constexpr bool is_von_mises(Family f) { return f == Family::VMcirc || f == Family::VMax; }
constexpr double period_of(Family f) { return is_circular(f) ? kTwoPi : kPi; }
constexpr double kappa_max(Family f) {
  return is_von_mises(f) ? kVonMisesKappaMax : kWrappedCauchyKappaMax;
}

inline std::string_view to_string(Family f) {
  switch (f) {
    case Family::VMcirc: return "VMcirc";
    case Family::WCcirc: return "WCcirc";
    case Family::VMax: return "VMax";
    case Family::WCax: return "WCax";
  }
  return "?";
}

inline Family family_from_string(std::string_view s) {
  for (Family f : {Family::VMcirc, Family::WCcirc, Family::VMax, Family::WCax}) {
    if (s == to_string(f)) return f;
  }
  throw DomainError("unknown family '" + std::string(s) + "'");
}

/// Location/concentration pair of one of the four families.
struct MarginalSpec {
  Family family = Family::VMcirc;
  double mu = 0.0;
  double kappa = 0.0;

  /// Reduces `mu` modulo the family period and checks `kappa`.
  static MarginalSpec make(Family family, double mu, double kappa) {
    if (!std::isfinite(mu)) throw DomainError("location must be finite");
    MarginalSpec s{family, wrap(mu, period_of(family)), kappa};
    s.validate();
    return s;
  }

  void validate() const {
    const double p = period_of(family);
    if (!(mu >= 0.0 && mu < p)) {
      throw DomainError(std::string(to_string(family)) + ": location " + std::to_string(mu) +
                        " outside [0, period)");
    }
    if (!(kappa >= 0.0) || kappa > kappa_max(family)) {
      throw DomainError(std::string(to_string(family)) + ": concentration " + std::to_string(kappa) +
                        " outside admissible range");
    }
  }

  double period() const { return period_of(family); }
  friend bool operator==(const MarginalSpec&, const MarginalSpec&) = default;
};

namespace detail {

// Centered wrapped Cauchy cdf on (-π, π], measured from -π.
inline double wc_centered_cdf(double t, double kappa) {
  const double ratio = (1.0 + kappa) / (1.0 - kappa);
  return 0.5 + std::atan(ratio * std::tan(0.5 * t)) / kPi;
}

// Periodic part of the wrapped Cauchy cdf: F_centered(t) = 1/2 + t/2π + g(t).
// atan(r tan(t/2)) - t/2 folds into one atan whose denominator never vanishes,
// so g is smooth and 2π-periodic with no branch cut.
inline double wc_periodic_part(double t, double kappa) {
  const double ratio = (1.0 + kappa) / (1.0 - kappa);
  const double c = std::cos(t);
  return std::atan((ratio - 1.0) * std::sin(t) / ((1.0 + c) + ratio * (1.0 - c))) / kPi;
}

inline double wc_centered_quantile(double v, double kappa) {
  const double ratio = (1.0 - kappa) / (1.0 + kappa);
  return 2.0 * std::atan(ratio * std::tan(kPi * (v - 0.5)));
}

// Σ_k a_k sin(k θ) with (cos kθ, sin kθ) advanced by rotation.
inline double sine_series(std::span<const double> coeffs, double theta) {
  const double c1 = std::cos(theta);
  const double s1 = std::sin(theta);
  double ck = c1;
  double sk = s1;
  double sum = 0.0;
  for (double a : coeffs) {
    sum += a * sk;
    const double cn = ck * c1 - sk * s1;
    sk = sk * c1 + ck * s1;
    ck = cn;
  }
  return sum;
}

}  // namespace detail

/// A validated marginal with its normalizing constants and cdf series precomputed.
/// Immutable after construction; safe to share across threads.
class Marginal {
 public:
  explicit Marginal(const MarginalSpec& spec) : spec_(spec) {
    spec_.validate();
    const double k = spec_.kappa;
    switch (spec_.family) {
      case Family::VMcirc:
      case Family::VMax: {
        // log(2π I0(κ) e^{-κ}); the axial form shares the constant since
        // cosh(κc)/(π I0) = (e^{κc} + e^{-κc}) / (2π I0).
        log_norm_ = std::log(kTwoPi) + special::log_bessel_i0(k) - k;
        const auto ratios = special::bessel_ratio_sequence(k);
        // Circular: F(x) = x/2π + (1/π) Σ ρ_k [sin k(x-μ) + sin kμ] / k.
        // Axial:    F(y) = y/π  + (1/π) Σ ρ_2m [sin 2m(y-μ) + sin 2mμ] / m.
        const bool axial = spec_.family == Family::VMax;
        for (std::size_t i = axial ? 1 : 0; i < ratios.size(); i += axial ? 2 : 1) {
          const double order = static_cast<double>(i + 1) / (axial ? 2.0 : 1.0);
          series_.push_back(ratios[i] / (kPi * order));
        }
        series_angle_scale_ = axial ? 2.0 : 1.0;
        series_offset_ = detail::sine_series(series_, series_angle_scale_ * spec_.mu);
        break;
      }
      case Family::WCcirc:
        wc_kappa_ = k;
        wc_mu_ = spec_.mu;
        break;
      case Family::WCax:
        wc_kappa_ = k * k;
        wc_mu_ = 2.0 * spec_.mu;
        break;
    }
    if (is_wc()) {
      wc_offset_ = detail::wc_centered_cdf(wrap_signed(-wc_mu_, kTwoPi), wc_kappa_);
      wc_periodic_offset_ = detail::wc_periodic_part(-wc_mu_, wc_kappa_);
    }
  }

  const MarginalSpec& spec() const noexcept { return spec_; }
  double period() const noexcept { return spec_.period(); }
  bool uniform() const noexcept { return spec_.kappa == 0.0; }

  double log_pdf(double t) const {
    if (uniform()) return -std::log(period());
    const double k = spec_.kappa;
    switch (spec_.family) {
      case Family::VMcirc:
        return k * (std::cos(t - spec_.mu) - 1.0) - log_norm_;
      case Family::VMax: {
        const double a = k * std::abs(std::cos(t - spec_.mu));
        return (a - k) + std::log1p(std::exp(-2.0 * a)) - log_norm_;
      }
      case Family::WCcirc:
        return std::log((1.0 - k * k) / (kTwoPi * (1.0 + k * k - 2.0 * k * std::cos(t - spec_.mu))));
      case Family::WCax: {
        const double k2 = k * k;
        return std::log((1.0 - k2 * k2) / (kPi * (1.0 + k2 * k2 - 2.0 * k2 * std::cos(2.0 * (t - spec_.mu)))));
      }
    }
    return 0.0;
  }

  double pdf(double t) const {
    if (uniform()) return 1.0 / period();
    const double k = spec_.kappa;
    switch (spec_.family) {
      case Family::WCcirc:
        return (1.0 - k * k) / (kTwoPi * (1.0 + k * k - 2.0 * k * std::cos(t - spec_.mu)));
      case Family::WCax: {
        const double k2 = k * k;
        return (1.0 - k2 * k2) / (kPi * (1.0 + k2 * k2 - 2.0 * k2 * std::cos(2.0 * (t - spec_.mu))));
      }
      default:
        return std::exp(log_pdf(t));
    }
  }

  /// Distribution function measured from angle 0, for t reduced into [0, period).
  double cdf(double t) const {
    const double p = period();
    t = wrap(t, p);
    if (uniform()) return t / p;
    double value;
    if (is_wc()) {
      const double scaled = spec_.family == Family::WCax ? 2.0 * t : t;
      value = scaled / kTwoPi + detail::wc_periodic_part(scaled - wc_mu_, wc_kappa_) - wc_periodic_offset_;
    } else {
      value = t / p +
              detail::sine_series(series_, series_angle_scale_ * (t - spec_.mu)) + series_offset_;
    }
    return std::clamp(value, 0.0, 1.0);
  }

  /// Inverse distribution function on [0, 1); closed form for wrapped Cauchy,
  /// bisection then safeguarded Newton for von Mises.
  double inv_cdf(double u) const {
    if (!(u >= 0.0 && u < 1.0)) throw DomainError("inv_cdf: probability outside [0, 1)");
    const double p = period();
    if (uniform()) return wrap(p * u, p);
    if (is_wc()) {
      double v = u + wc_offset_;
      if (v >= 1.0) v -= 1.0;
      double t = wrap(wc_mu_ + detail::wc_centered_quantile(v, wc_kappa_), kTwoPi);
      if (spec_.family == Family::WCax) t *= 0.5;
      return wrap(t, p);
    }
    double lo = 0.0;
    double hi = p;
    while (hi - lo > 1e-6) {
      const double mid = 0.5 * (lo + hi);
      if (cdf(mid) < u) lo = mid; else hi = mid;
    }
    double t = 0.5 * (lo + hi);
    for (int it = 0; it < 60; ++it) {
      const double diff = cdf(t) - u;
      if (diff == 0.0) break;
      if (diff < 0.0) lo = t; else hi = t;
      const double dens = pdf(t);
      double next = dens > 0.0 ? t - diff / dens : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - t) <= 1e-15 * std::max(1.0, t)) {
        t = next;
        break;
      }
      t = next;
    }
    return wrap(t, p);
  }

  double sample(Rng& rng) const { return inv_cdf(uniform01(rng)); }

 private:
  bool is_wc() const noexcept {
    return spec_.family == Family::WCcirc || spec_.family == Family::WCax;
  }

  MarginalSpec spec_;
  double log_norm_ = 0.0;
  std::vector<double> series_;
  double series_angle_scale_ = 1.0;
  double series_offset_ = 0.0;
  double wc_kappa_ = 0.0;
  double wc_mu_ = 0.0;
  double wc_offset_ = 0.0;
  double wc_periodic_offset_ = 0.0;
};

inline double pdf(const MarginalSpec& spec, double t) { return Marginal(spec).pdf(t); }
inline double cdf(const MarginalSpec& spec, double t) { return Marginal(spec).cdf(t); }
inline double inv_cdf(const MarginalSpec& spec, double u) { return Marginal(spec).inv_cdf(u); }
inline double sample(const MarginalSpec& spec, Rng& rng) { return Marginal(spec).sample(rng); }

/// Σ w_i log f(t_i).
inline double weighted_loglik(const MarginalSpec& spec, std::span<const double> data,
                              std::span<const double> weights) {
  const Marginal m(spec);
  double s = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (weights[i] != 0.0) s += weights[i] * m.log_pdf(data[i]);
  }
  return s;
}

namespace detail {

inline double check_weights(std::span<const double> data, std::span<const double> weights) {
  if (data.empty() || data.size() != weights.size()) {
    throw DomainError("weighted_mle: data and weights must be nonempty and of equal length");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("weighted_mle: weights must be finite and nonnegative");
    total += w;
  }
  if (!(total > 0.0)) throw DegenerateInputError("weighted_mle: all weights are zero");
  return total;
}

inline MarginalSpec von_mises_circular_mle(std::span<const double> data, std::span<const double> weights,
                                           double total) {
  double c = 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    c += weights[i] * std::cos(data[i]);
    s += weights[i] * std::sin(data[i]);
  }
  const double rbar = std::min(1.0, std::hypot(c, s) / total);
  const double mu = rbar > 0.0 ? wrap_circular(std::atan2(s, c)) : 0.0;
  return MarginalSpec::make(Family::VMcirc, mu, special::inverse_bessel_ratio(rbar, kVonMisesKappaMax));
}

// Wrapped Cauchy as f(x) ∝ sqrt(1-|m|²) / (1 - m·e(x)) with m = 2κ e^{iμ} / (1+κ²).
// Stationarity gives m = Σ w a e / Σ w a with a = 1/(1 - m·e); iterate that map.
inline std::optional<MarginalSpec> wrapped_cauchy_fixed_point(std::span<const double> data,
                                                              std::span<const double> weights,
                                                              int max_iter) {
  constexpr double kMaxMean = 2.0 * kWrappedCauchyKappaMax / (1.0 + kWrappedCauchyKappaMax * kWrappedCauchyKappaMax);
  std::vector<double> cs(data.size());
  std::vector<double> sn(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    cs[i] = std::cos(data[i]);
    sn[i] = std::sin(data[i]);
  }
  double m1 = 0.0;
  double m2 = 0.0;
  bool converged = false;
  for (int it = 0; it < max_iter; ++it) {
    double sa = 0.0;
    double sc = 0.0;
    double ss = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (weights[i] == 0.0) continue;
      const double a = weights[i] / std::max(1.0 - m1 * cs[i] - m2 * sn[i], 1e-300);
      sa += a;
      sc += a * cs[i];
      ss += a * sn[i];
    }
    double n1 = sc / sa;
    double n2 = ss / sa;
    const double r = std::hypot(n1, n2);
    if (r > kMaxMean) {
      n1 *= kMaxMean / r;
      n2 *= kMaxMean / r;
    }
    const double step = std::hypot(n1 - m1, n2 - m2);
    m1 = n1;
    m2 = n2;
    if (step < 1e-13) {
      converged = true;
      break;
    }
  }
  if (!converged) return std::nullopt;
  const double r = std::hypot(m1, m2);
  const double kappa = r > 0.0 ? std::min((1.0 - std::sqrt(std::max(0.0, 1.0 - r * r))) / r, kWrappedCauchyKappaMax) : 0.0;
  const double mu = r > 0.0 ? wrap_circular(std::atan2(m2, m1)) : 0.0;
  return MarginalSpec::make(Family::WCcirc, mu, kappa);
}

inline MarginalSpec wrapped_cauchy_circular_mle(std::span<const double> data, std::span<const double> weights,
                                                double total) {
  if (auto fp = wrapped_cauchy_fixed_point(data, weights, 200)) return *fp;
  // Direct search over (μ, atanh κ).
  auto objective = [&](const std::vector<double>& p) {
    const double kappa = std::min(std::tanh(std::abs(p[1])), kWrappedCauchyKappaMax);
    return weighted_loglik(MarginalSpec::make(Family::WCcirc, p[0], kappa), data, weights);
  };
  const auto start = von_mises_circular_mle(data, weights, total);
  const auto res = opt::nelder_mead_maximize(objective, {start.mu, 0.5}, {0.3, 0.3});
  return MarginalSpec::make(Family::WCcirc, res.x[0],
                            std::min(std::tanh(std::abs(res.x[1])), kWrappedCauchyKappaMax));
}

// Axial von Mises: ℓ(μ, κ) = Σ w log cosh(κ cos(y-μ)) - W log I0(κ) + const,
// maximized over (μ, s = log κ) by damped Newton with analytic derivatives.
class AxialVonMisesObjective {
 public:
  static constexpr double kLogKappaMin = -6.0;
  static inline const double kLogKappaMax = std::log(kVonMisesKappaMax);

  AxialVonMisesObjective(std::span<const double> data, std::span<const double> weights) {
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (weights[i] == 0.0) continue;
      cs_.push_back(std::cos(data[i]));
      sn_.push_back(std::sin(data[i]));
      w_.push_back(weights[i]);
      total_ += weights[i];
    }
  }

  double value(double mu, double kappa) const {
    const double cm = std::cos(mu);
    const double sm = std::sin(mu);
    double s = 0.0;
    for (std::size_t i = 0; i < w_.size(); ++i) {
      const double a = kappa * std::abs(cs_[i] * cm + sn_[i] * sm);
      s += w_[i] * (a + std::log1p(std::exp(-2.0 * a)));
    }
    return s - total_ * (special::log_bessel_i0(kappa));
  }

  struct Local {
    double value;
    double g_mu;
    double g_s;
    double h_mm;
    double h_ms;
    double h_ss;
  };

  Local local(double mu, double log_kappa) const {
    const double kappa = std::exp(log_kappa);
    const double cm = std::cos(mu);
    const double sm = std::sin(mu);
    double val = 0.0, gm = 0.0, gk = 0.0, hmm = 0.0, hkk = 0.0, hmk = 0.0;
    for (std::size_t i = 0; i < w_.size(); ++i) {
      const double c = cs_[i] * cm + sn_[i] * sm;   // cos(y - μ)
      const double s = sn_[i] * cm - cs_[i] * sm;   // sin(y - μ)
      const double a = kappa * c;
      const double e = std::exp(-2.0 * std::abs(a));
      const double th = std::copysign((1.0 - e) / (1.0 + e), a);
      const double sech2 = 1.0 - th * th;
      const double w = w_[i];
      val += w * (std::abs(a) + std::log1p(e));
      gm += w * th * kappa * s;
      gk += w * th * c;
      hmm += w * (sech2 * kappa * kappa * s * s - th * kappa * c);
      hkk += w * sech2 * c * c;
      hmk += w * (sech2 * kappa * c * s + th * s);
    }
    const double i0 = special::bessel_i0(kappa);
    const double ratio = special::bessel_i1(kappa) / i0;
    val -= total_ * std::log(i0);
    gk -= total_ * ratio;
    hkk -= total_ * (1.0 - ratio / kappa - ratio * ratio);
    return {val, gm, kappa * gk, hmm, kappa * hmk, kappa * kappa * hkk + kappa * gk};
  }

  /// Newton ascent from (mu, log κ); returns (μ, log κ, value).
  std::array<double, 3> climb(double mu, double log_kappa) const {
    log_kappa = std::clamp(log_kappa, kLogKappaMin, kLogKappaMax);
    Local cur = local(mu, log_kappa);
    for (int it = 0; it < 100; ++it) {
      // Negative-definite modification of the Hessian.
      double lambda = 0.0;
      double dm = 0.0, ds = 0.0;
      for (int tries = 0; tries < 60; ++tries) {
        const double a = cur.h_mm - lambda;
        const double d = cur.h_ss - lambda;
        const double b = cur.h_ms;
        const double det = a * d - b * b;
        if (a < 0.0 && det > 0.0) {
          dm = -(d * cur.g_mu - b * cur.g_s) / det;
          ds = -(a * cur.g_s - b * cur.g_mu) / det;
          break;
        }
        lambda = lambda == 0.0 ? 1e-6 * (1.0 + std::abs(cur.h_mm) + std::abs(cur.h_ss)) : lambda * 10.0;
      }
      // Converged once the Newton model promises no further gain.
      if (cur.g_mu * dm + cur.g_s * ds < 1e-13 * std::max(1.0, total_)) break;
      double step = 1.0;
      bool moved = false;
      // Cap the location step to a quarter turn.
      if (std::abs(dm) > kPi / 4.0) {
        const double f = (kPi / 4.0) / std::abs(dm);
        dm *= f;
        ds *= f;
      }
      for (int bt = 0; bt < 40; ++bt) {
        const double nm = mu + step * dm;
        const double ns = std::clamp(log_kappa + step * ds, kLogKappaMin, kLogKappaMax);
        const Local next = local(nm, ns);
        if (next.value >= cur.value) {
          const bool tiny = std::abs(nm - mu) < 1e-12 && std::abs(ns - log_kappa) < 1e-12;
          mu = nm;
          log_kappa = ns;
          cur = next;
          moved = !tiny;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
      const bool at_bound = log_kappa <= kLogKappaMin || log_kappa >= kLogKappaMax;
      const double gnorm = std::abs(cur.g_mu) + (at_bound ? 0.0 : std::abs(cur.g_s));
      if (gnorm < 1e-10 * std::max(1.0, total_)) break;
    }
    return {wrap_axial(mu), log_kappa, cur.value};
  }

  double total() const { return total_; }

 private:
  std::vector<double> cs_, sn_, w_;
  double total_ = 0.0;
};

inline MarginalSpec von_mises_axial_mle(std::span<const double> data, std::span<const double> weights,
                                        const std::optional<MarginalSpec>& init) {
  const AxialVonMisesObjective obj(data, weights);
  std::vector<std::array<double, 2>> starts;
  if (init && init->kappa > 0.0) {
    starts.push_back({init->mu, std::log(init->kappa)});
  } else {
    for (int q = 0; q < 4; ++q) starts.push_back({(q + 0.5) * kPi / 4.0, 0.0});
  }
  std::array<double, 3> best{0.0, 0.0, -1e300};
  for (const auto& s : starts) {
    const auto r = obj.climb(s[0], s[1]);
    if (r[2] > best[2]) best = r;
  }
  return MarginalSpec::make(Family::VMax, best[0], std::min(std::exp(best[1]), kVonMisesKappaMax));
}

}  // namespace detail

/// Weighted maximum-likelihood estimate of (μ, κ) for `family`.
/// `init`, when supplied, replaces the multistart of the axial von Mises search
/// with a single ascent from that point.
inline MarginalSpec weighted_mle(Family family, std::span<const double> data, std::span<const double> weights,
                                 const std::optional<MarginalSpec>& init = std::nullopt) {
  const double total = detail::check_weights(data, weights);
  switch (family) {
    case Family::VMcirc:
      return detail::von_mises_circular_mle(data, weights, total);
    case Family::WCcirc:
      return detail::wrapped_cauchy_circular_mle(data, weights, total);
    case Family::VMax:
      return detail::von_mises_axial_mle(data, weights, init);
    case Family::WCax: {
      std::vector<double> doubled(data.size());
      for (std::size_t i = 0; i < data.size(); ++i) doubled[i] = wrap_circular(2.0 * data[i]);
      const MarginalSpec c = detail::wrapped_cauchy_circular_mle(doubled, weights, total);
      return MarginalSpec::make(Family::WCax, 0.5 * c.mu, std::min(std::sqrt(c.kappa), kWrappedCauchyKappaMax));
    }
  }
  throw DomainError("weighted_mle: unknown family");
}

}  // namespace circmix

#endif  // CIRCMIX_DIRECTIONAL_HPP
