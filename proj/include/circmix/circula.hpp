#ifndef CIRCMIX_CIRCULA_HPP
#define CIRCMIX_CIRCULA_HPP

// Periodic copula ("circula") built from the one-parameter bivariate wrapped
// Cauchy on the torus, and the circular-axial density it induces.

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "circmix/angles.hpp"
#include "circmix/directional.hpp"
#include "circmix/errors.hpp"
#include "circmix/optimize.hpp"
#include "circmix/random.hpp"

namespace circmix {

inline constexpr double kRhoMax = 1.0 - 1e-6;

/// Copula correlation, held inside [-kRhoMax, kRhoMax].
class CopulaCorrelation {
 public:
  constexpr CopulaCorrelation() = default;
  /// |rho| > 1 or non-finite is rejected; values in (1 - 1e-6, 1] are clamped.
  explicit CopulaCorrelation(double rho) {
    if (!std::isfinite(rho) || std::abs(rho) > 1.0) {
      throw DomainError("copula correlation must lie in [-1, 1]");
    }
    value_ = std::clamp(rho, -kRhoMax, kRhoMax);
  }
  double value() const noexcept { return value_; }
  friend bool operator==(CopulaCorrelation, CopulaCorrelation) = default;

 private:
  double value_ = 0.0;
};

struct TorusPoint {
  double delta1 = 0.0;
  double delta2 = 0.0;
  TorusPoint() = default;
  TorusPoint(double d1, double d2) : delta1(wrap_circular(d1)), delta2(wrap_circular(d2)) {}
};

/// Parameters of one circular-axial component.
struct ComponentParams {
  MarginalSpec circ;
  MarginalSpec axial;
  CopulaCorrelation rho;

  void validate() const {
    if (!is_circular(circ.family)) throw DomainError("component: circular marginal has an axial family");
    if (is_circular(axial.family)) throw DomainError("component: axial marginal has a circular family");
    circ.validate();
    axial.validate();
  }
  friend bool operator==(const ComponentParams&, const ComponentParams&) = default;
};

namespace detail {
inline double bwc_denominator(double rho, double c1, double s1, double c2, double s2) {
  return 1.0 + rho * rho - 2.0 * std::abs(rho) * c1 * c2 - 2.0 * rho * s1 * s2;
}
// Distribution values of exactly 1 come only from rounding.
inline double clamp_unit(double u) { return std::min(u, 1.0 - 1e-15); }
}  // namespace detail

/// Bivariate wrapped Cauchy density on the torus with uniform marginals.
inline double bwc_density(CopulaCorrelation rho, TorusPoint p) {
  const double r = rho.value();
  return (1.0 - r * r) / (4.0 * kPi * kPi *
                          detail::bwc_denominator(r, std::cos(p.delta1), std::sin(p.delta1),
                                                  std::cos(p.delta2), std::sin(p.delta2)));
}

/// Copula density on [0,1)², equal to 4π² times bwc_density at (2πu, 2πv).
inline double circula_density(CopulaCorrelation rho, double u, double v) {
  const double r = rho.value();
  if (r == 0.0) return 1.0;
  const double a = kTwoPi * detail::clamp_unit(u);
  const double b = kTwoPi * detail::clamp_unit(v);
  return (1.0 - r * r) / detail::bwc_denominator(r, std::cos(a), std::sin(a), std::cos(b), std::sin(b));
}

inline double log_circula_density(CopulaCorrelation rho, double u, double v) {
  return std::log(circula_density(rho, u, v));
}

/// Conditional law of δ₂ given δ₁ under bwc_density: since
/// |ρ|cosδ₁cosδ₂ + ρ sinδ₁sinδ₂ = |ρ|cos(δ₂ - sign(ρ)δ₁), it is WC(sign(ρ)δ₁, |ρ|).
inline MarginalSpec conditional_wc(CopulaCorrelation rho, double delta1) {
  const double r = rho.value();
  if (r == 0.0) return MarginalSpec::make(Family::WCcirc, 0.0, 0.0);
  return MarginalSpec::make(Family::WCcirc, r > 0.0 ? delta1 : -delta1, std::abs(r));
}

/// A component with its marginals prepared for repeated evaluation.
class Component {
 public:
  explicit Component(const ComponentParams& params)
      : params_((params.validate(), params)), circ_(params.circ), axial_(params.axial) {}

  const ComponentParams& params() const noexcept { return params_; }
  const Marginal& circular() const noexcept { return circ_; }
  const Marginal& axial() const noexcept { return axial_; }

  double log_density(double x, double y) const {
    return log_circula_density(params_.rho, circ_.cdf(x), axial_.cdf(y)) + circ_.log_pdf(x) +
           axial_.log_pdf(y);
  }

  double density(double x, double y) const { return std::exp(log_density(x, y)); }

  /// Exact draw: y by inversion, then the circula conditional at δ₁ = 2πF_ax(y),
  /// then x = F_circ⁻¹(δ₂ / 2π).
  std::pair<CircularAngle, AxialAngle> sample(Rng& rng) const {
    const double nu = uniform01(rng);
    const double y = axial_.inv_cdf(nu);
    const double delta1 = kTwoPi * detail::clamp_unit(axial_.cdf(y));
    const Marginal cond(conditional_wc(params_.rho, delta1));
    const double delta2 = cond.sample(rng);
    const double u = std::min(delta2 / kTwoPi, std::nextafter(1.0, 0.0));
    return {CircularAngle(circ_.inv_cdf(u)), AxialAngle(y)};
  }

 private:
  ComponentParams params_;
  Marginal circ_;
  Marginal axial_;
};

inline double joint_density(const ComponentParams& theta, CircularAngle x, AxialAngle y) {
  return Component(theta).density(x.value(), y.value());
}

inline std::pair<CircularAngle, AxialAngle> sample_pair(const ComponentParams& theta, Rng& rng) {
  return Component(theta).sample(rng);
}

/// Σ w log c_ρ(u, v) with the trigonometric products precomputed, so that a
/// scalar search over ρ costs one log per observation.
class RhoObjective {
 public:
  RhoObjective(std::span<const double> u, std::span<const double> v, std::span<const double> w) {
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (w[i] == 0.0) continue;
      const double a = kTwoPi * detail::clamp_unit(u[i]);
      const double b = kTwoPi * detail::clamp_unit(v[i]);
      cc_.push_back(std::cos(a) * std::cos(b));
      ss_.push_back(std::sin(a) * std::sin(b));
      w_.push_back(w[i]);
      total_ += w[i];
    }
  }

  double operator()(double rho) const {
    const double ar = std::abs(rho);
    double s = 0.0;
    for (std::size_t i = 0; i < w_.size(); ++i) {
      s -= w_[i] * std::log(1.0 + rho * rho - 2.0 * ar * cc_[i] - 2.0 * rho * ss_[i]);
    }
    return s + total_ * std::log(1.0 - rho * rho);
  }

  double total() const noexcept { return total_; }

 private:
  std::vector<double> cc_, ss_, w_;
  double total_ = 0.0;
};

/// Maximizes Σ w log c_ρ(u, v) over ρ ∈ [-kRhoMax, kRhoMax]: a coarse grid picks
/// the bracket, golden-section/parabolic steps refine it to 1e-8.
inline CopulaCorrelation rho_mle_from_uniforms(std::span<const double> u, std::span<const double> v,
                                               std::span<const double> w) {
  if (u.size() != v.size() || u.size() != w.size() || u.empty()) {
    throw DomainError("weighted_rho_mle: inputs must be nonempty and of equal length");
  }
  const RhoObjective objective(u, v, w);
  if (!(objective.total() > 0.0)) throw DegenerateInputError("weighted_rho_mle: all weights are zero");
  const auto r = opt::grid_then_brent(objective, -kRhoMax, kRhoMax, 21, 1e-8);
  return CopulaCorrelation(r.x);
}

inline CopulaCorrelation weighted_rho_mle(std::span<const std::pair<CircularAngle, AxialAngle>> pairs,
                                          std::span<const double> weights, const MarginalSpec& circ,
                                          const MarginalSpec& axial) {
  if (pairs.size() != weights.size()) throw DomainError("weighted_rho_mle: size mismatch");
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("weighted_rho_mle: weights must be finite and nonnegative");
  }
  const Marginal fc(circ);
  const Marginal fa(axial);
  std::vector<double> u(pairs.size()), v(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    u[i] = fc.cdf(pairs[i].first.value());
    v[i] = fa.cdf(pairs[i].second.value());
  }
  return rho_mle_from_uniforms(u, v, weights);
}

}  // namespace circmix

#endif  // CIRCMIX_CIRCULA_HPP
