#ifndef CIRCMIX_BOOTSTRAP_HPP
#define CIRCMIX_BOOTSTRAP_HPP

// Parametric bootstrap with equal-tail percentile intervals.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "circmix/alignment.hpp"
#include "circmix/angles.hpp"
#include "circmix/errors.hpp"
#include "circmix/mixture.hpp"
#include "circmix/parallel.hpp"
#include "circmix/random.hpp"
#include "circmix/simulate.hpp"

namespace circmix {

/// Sample quantile with Hazen plotting positions: the k-th order statistic sits
/// at probability (k - 1/2)/n, linear in between, flat beyond the extremes.
inline double hazen_quantile(std::vector<double> sorted, double p) {
  const double n = static_cast<double>(sorted.size());
  const double h = std::clamp(n * p + 0.5, 1.0, n);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const double frac = h - static_cast<double>(lo);
  if (lo >= sorted.size()) return sorted.back();
  return sorted[lo - 1] + frac * (sorted[lo] - sorted[lo - 1]);
}

/// Equal-tail interval at (1 - level)/2 and (1 + level)/2.
inline std::pair<double, double> et_interval(std::vector<double> samples, double level) {
  if (samples.size() < 2) throw DomainError("et_interval: need at least two samples");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("et_interval: level must lie in (0, 1)");
  for (double s : samples) {
    if (!std::isfinite(s)) throw DomainError("et_interval: samples must be finite");
  }
  std::sort(samples.begin(), samples.end());
  const double a = 0.5 * (1.0 - level);
  return {hazen_quantile(samples, a), hazen_quantile(samples, 1.0 - a)};
}

/// Equal-tail interval for a periodic location. Samples are unwrapped onto the
/// arc of one period centred at `point`; the result runs counterclockwise from
/// `first` to `second`, both reduced to [0, period), so `first > second` when the
/// arc crosses zero.
inline std::pair<double, double> circular_et_interval(std::vector<double> samples, double level, double point,
                                                      double period) {
  for (auto& s : samples) {
    if (!std::isfinite(s)) throw DomainError("et_interval: samples must be finite");
    s = point + wrap_signed(s - point, period);
  }
  const auto [lo, hi] = et_interval(std::move(samples), level);
  return {wrap(lo, period), wrap(hi, period)};
}

/// Counterclockwise arc membership for intervals from circular_et_interval.
inline bool arc_contains(std::pair<double, double> arc, double value, double period) {
  const double v = wrap(value, period);
  if (arc.first <= arc.second) return v >= arc.first && v <= arc.second;
  return v >= arc.first || v <= arc.second;
}

enum class ParameterKind { Linear, Circular, Axial };

struct ParameterInfo {
  std::string name;       // mu_circ, kappa_circ, mu_axial, kappa_axial, rho, beta
  int component = 0;      // 1-based
  std::string covariate;  // regression coefficients only
  ParameterKind kind = ParameterKind::Linear;

  double period() const { return kind == ParameterKind::Circular ? kTwoPi : kPi; }
  std::string label() const {
    std::string s = name + "[" + std::to_string(component) + "]";
    if (!covariate.empty()) s += "[" + covariate + "]";
    return s;
  }
};

/// Parameter layout: five density parameters per component, then one row of
/// regression coefficients per non-reference class.
inline std::vector<ParameterInfo> parameter_layout(const MixtureModel& model, const std::vector<std::string>& covariates) {
  std::vector<ParameterInfo> out;
  for (int j = 1; j <= model.J(); ++j) {
    out.push_back({"mu_circ", j, "", ParameterKind::Circular});
    out.push_back({"kappa_circ", j, "", ParameterKind::Linear});
    out.push_back({"mu_axial", j, "", ParameterKind::Axial});
    out.push_back({"kappa_axial", j, "", ParameterKind::Linear});
    out.push_back({"rho", j, "", ParameterKind::Linear});
  }
  for (int j = 2; j <= model.J(); ++j) {
    for (int c = 0; c < model.coefficients.columns(); ++c) {
      const std::string cov = c < static_cast<int>(covariates.size()) ? covariates[static_cast<std::size_t>(c)]
                                                                      : "z" + std::to_string(c);
      out.push_back({"beta", j, cov, ParameterKind::Linear});
    }
  }
  return out;
}

inline std::vector<double> flatten(const MixtureModel& model) {
  std::vector<double> out;
  for (const auto& c : model.components) {
    out.insert(out.end(), {c.circ.mu, c.circ.kappa, c.axial.mu, c.axial.kappa, c.rho.value()});
  }
  for (Eigen::Index j = 0; j < model.coefficients.beta.rows(); ++j) {
    for (Eigen::Index c = 0; c < model.coefficients.beta.cols(); ++c) out.push_back(model.coefficients.beta(j, c));
  }
  return out;
}

struct ParameterInterval {
  ParameterInfo info;
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct BootstrapConfig {
  int restarts = 4;  // random restarts besides the warm start at the estimate
  int screen_iterations = 15;
  int screen_keep = 2;
  unsigned threads = 1;
  std::uint64_t seed = 20240101;
};

struct BootstrapResult {
  std::vector<ParameterInterval> intervals;
  double level = 0.95;
  int B = 0;
  int B_effective = 0;
  bool low_success = false;                      // B_effective < 0.8 B
  std::vector<int> replicate_index;              // successful replicates, in order
  std::vector<Permutation> alignment;            // per successful replicate
  std::vector<std::vector<double>> replicates;   // aligned parameter vectors
  std::vector<std::string> failures;             // one message per failed replicate
};

/// Builds intervals from replicate parameter vectors aligned to `estimate`.
inline std::vector<ParameterInterval> bootstrap_intervals(const MixtureModel& estimate,
                                                          const std::vector<std::string>& covariates,
                                                          const std::vector<std::vector<double>>& replicates,
                                                          double level) {
  const auto layout = parameter_layout(estimate, covariates);
  const auto point = flatten(estimate);
  std::vector<ParameterInterval> out;
  for (std::size_t k = 0; k < layout.size(); ++k) {
    std::vector<double> col;
    col.reserve(replicates.size());
    for (const auto& r : replicates) col.push_back(r[k]);
    ParameterInterval iv{layout[k], point[k], 0.0, 0.0};
    const auto [lo, hi] = layout[k].kind == ParameterKind::Linear
                              ? et_interval(col, level)
                              : circular_et_interval(col, level, point[k], layout[k].period());
    iv.lower = lo;
    iv.upper = hi;
    out.push_back(iv);
  }
  return out;
}

/// Refits B datasets simulated from the fitted model at the observed covariates,
/// aligns each refit to the estimate and reports equal-tail intervals.
inline BootstrapResult parametric_bootstrap(const FitResult& fitted, const Dataset& data, int B, double level,
                                            const BootstrapConfig& config = {}) {
  if (B < 2) throw DomainError("bootstrap: B must be at least 2");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("bootstrap: level must lie in (0, 1)");
  if (!fitted.converged) throw DomainError("bootstrap: the fit has not converged");
  const MixtureModel& estimate = fitted.model;
  estimate.validate();
  const FamilyPair families = estimate.families();
  const int J = estimate.J();

  struct Replicate {
    bool ok = false;
    Permutation perm;
    std::vector<double> params;
    std::string error;
  };
  std::vector<Replicate> reps(static_cast<std::size_t>(B));
  parallel_for(reps.size(), config.threads, [&](std::size_t b) {
    auto& rep = reps[b];
    try {
      Rng rng = make_stream(config.seed, 2 * b);
      const SimulatedData sim = simulate_dataset(estimate, data.z, rng, data.covariate_names);
      FitConfig fc;
      fc.warm_starts = {estimate};
      fc.restarts = config.restarts;
      fc.screen_iterations = config.screen_iterations;
      fc.screen_keep = config.screen_keep;
      fc.seed = derive_seed(config.seed, 2 * b + 1);
      fc.threads = 1;
      const FitResult refit = fit(sim.data, families, J, fc);
      rep.perm = align_labels(estimate, refit.model);
      rep.params = flatten(permute(refit.model, rep.perm));
      rep.ok = true;
    } catch (const std::exception& e) {
      rep.error = "replicate " + std::to_string(b) + ": " + e.what();
    }
  });

  BootstrapResult out;
  out.level = level;
  out.B = B;
  for (std::size_t b = 0; b < reps.size(); ++b) {
    if (!reps[b].ok) {
      out.failures.push_back(reps[b].error);
      continue;
    }
    out.replicate_index.push_back(static_cast<int>(b));
    out.alignment.push_back(std::move(reps[b].perm));
    out.replicates.push_back(std::move(reps[b].params));
  }
  out.B_effective = static_cast<int>(out.replicates.size());
  out.low_success = out.B_effective < 0.8 * B;
  if (out.B_effective < 2) throw FitFailure("bootstrap: fewer than two replicate fits succeeded");
  out.intervals = bootstrap_intervals(estimate, data.covariate_names, out.replicates, level);
  return out;
}

}  // namespace circmix

#endif  // CIRCMIX_BOOTSTRAP_HPP
