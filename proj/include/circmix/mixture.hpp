#ifndef CIRCMIX_MIXTURE_HPP
#define CIRCMIX_MIXTURE_HPP

// Finite mixtures of circular-axial copula densities whose class weights follow
// a multinomial logit in the covariates, fitted by EM with IFM M-steps.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "circmix/angles.hpp"
#include "circmix/circula.hpp"
#include "circmix/directional.hpp"
#include "circmix/errors.hpp"
#include "circmix/logit.hpp"
#include "circmix/parallel.hpp"
#include "circmix/random.hpp"

namespace circmix {

/// The (circular, axial) family combination shared by all components of a model.
struct FamilyPair {
  Family circular = Family::VMcirc;
  Family axial = Family::VMax;

  void validate() const {
    if (!is_circular(circular) || is_circular(axial)) throw DomainError("family pair must be (circular, axial)");
  }
  friend bool operator==(const FamilyPair&, const FamilyPair&) = default;
};

/// Short label used in tables: VM-AX, VM-AXWC, WC-AX, WC-AXWC.
inline std::string to_string(const FamilyPair& f) {
  std::string s = f.circular == Family::VMcirc ? "VM" : "WC";
  s += f.axial == Family::VMax ? "-AX" : "-AXWC";
  return s;
}

inline FamilyPair family_pair_from_string(const std::string& s) {
  for (Family c : {Family::VMcirc, Family::WCcirc}) {
    for (Family a : {Family::VMax, Family::WCax}) {
      if (to_string(FamilyPair{c, a}) == s) return {c, a};
    }
  }
  throw DomainError("unknown family pair '" + s + "' (expected VM-AX, VM-AXWC, WC-AX or WC-AXWC)");
}

inline std::vector<FamilyPair> all_family_pairs() {
  return {{Family::VMcirc, Family::VMax}, {Family::VMcirc, Family::WCax}, {Family::WCcirc, Family::VMax},
          {Family::WCcirc, Family::WCax}};
}

/// Observations: circular angles in [0, 2π), axial angles in [0, π) and a
/// covariate matrix whose first column is the intercept.
struct Dataset {
  std::vector<double> x;
  std::vector<double> y;
  Eigen::MatrixXd z;
  std::vector<std::string> covariate_names;

  static Dataset make(std::vector<double> x, std::vector<double> y, Eigen::MatrixXd z,
                      std::vector<std::string> names = {}) {
    Dataset d;
    if (x.empty()) throw DomainError("dataset: no observations");
    if (x.size() != y.size() || static_cast<Eigen::Index>(x.size()) != z.rows()) {
      throw DomainError("dataset: x, y and z must have the same number of rows");
    }
    if (z.cols() < 1) throw DomainError("dataset: covariate matrix needs an intercept column");
    if (!z.allFinite()) throw DomainError("dataset: covariates must be finite");
    if ((z.col(0).array() != 1.0).any()) throw DomainError("dataset: first covariate column must be the intercept (all ones)");
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
        throw DomainError("dataset: non-finite angle at row " + std::to_string(i));
      }
      x[i] = wrap_circular(x[i]);
      y[i] = wrap_axial(y[i]);
    }
    if (names.empty()) {
      names.emplace_back("(intercept)");
      for (Eigen::Index c = 1; c < z.cols(); ++c) names.push_back("z" + std::to_string(c));
    }
    if (static_cast<Eigen::Index>(names.size()) != z.cols()) throw DomainError("dataset: covariate name count mismatch");
    d.x = std::move(x);
    d.y = std::move(y);
    d.z = std::move(z);
    d.covariate_names = std::move(names);
    return d;
  }

  std::size_t size() const noexcept { return x.size(); }
  int n_coef() const noexcept { return static_cast<int>(z.cols()); }
};

struct MixtureModel {
  std::vector<ComponentParams> components;
  ConcomitantCoefficients coefficients;

  int J() const noexcept { return static_cast<int>(components.size()); }
  FamilyPair families() const {
    return components.empty() ? FamilyPair{} : FamilyPair{components.front().circ.family, components.front().axial.family};
  }

  void validate() const {
    if (components.empty()) throw DomainError("mixture: needs at least one component");
    const FamilyPair f = families();
    f.validate();
    for (const auto& c : components) {
      c.validate();
      if (c.circ.family != f.circular || c.axial.family != f.axial) {
        throw DomainError("mixture: all components must share the family pair");
      }
    }
    if (coefficients.classes() != J()) throw DomainError("mixture: coefficient rows must equal J - 1");
    if (!coefficients.beta.allFinite()) throw DomainError("mixture: coefficients must be finite");
  }
};

/// 5 density parameters per component plus (J-1)(q+1) regression coefficients.
inline int parameter_count(int J, int n_coef) { return 5 * J + (J - 1) * n_coef; }

inline double bic(double loglik, int n_params, std::size_t n) {
  return -2.0 * loglik + n_params * std::log(static_cast<double>(n));
}

inline Eigen::VectorXd mixing_weights(const MixtureModel& model, const Eigen::Ref<const Eigen::VectorXd>& z) {
  return mixing_weights(model.coefficients, z);
}

namespace detail {

inline std::vector<Component> prepare(const MixtureModel& model) {
  std::vector<Component> out;
  out.reserve(model.components.size());
  for (const auto& c : model.components) out.emplace_back(c);
  return out;
}

inline void check_dims(const MixtureModel& model, const Dataset& data) {
  if (model.J() > 1 && model.coefficients.columns() != data.n_coef()) {
    throw DomainError("model has " + std::to_string(model.coefficients.columns()) + " coefficient columns, data has " +
                      std::to_string(data.n_coef()) + " covariates");
  }
}

// log π_j(z_i) + log f(x_i, y_i; θ_j), n x J.
inline Eigen::MatrixXd log_joint_terms(const MixtureModel& model, const Dataset& data) {
  check_dims(model, data);
  const auto comps = prepare(model);
  const Eigen::Index n = static_cast<Eigen::Index>(data.size());
  Eigen::MatrixXd out = model.J() > 1 ? log_mixing_weights(model.coefficients, data.z)
                                      : Eigen::MatrixXd::Zero(n, 1);
  for (int j = 0; j < model.J(); ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      out(i, j) += comps[static_cast<std::size_t>(j)].log_density(data.x[static_cast<std::size_t>(i)],
                                                                  data.y[static_cast<std::size_t>(i)]);
    }
  }
  return out;
}

struct Evaluation {
  double loglik = 0.0;
  Eigen::MatrixXd responsibilities;
};

inline Evaluation evaluate(const MixtureModel& model, const Dataset& data) {
  Eigen::MatrixXd terms = log_joint_terms(model, data);
  Evaluation ev;
  ev.responsibilities.resize(terms.rows(), terms.cols());
  for (Eigen::Index i = 0; i < terms.rows(); ++i) {
    const double m = terms.row(i).maxCoeff();
    if (!std::isfinite(m)) throw NumericalError("non-finite log density", i);
    const Eigen::RowVectorXd e = (terms.row(i).array() - m).exp();
    const double s = e.sum();
    ev.loglik += m + std::log(s);
    ev.responsibilities.row(i) = e / s;
  }
  if (!std::isfinite(ev.loglik)) throw NumericalError("non-finite log-likelihood");
  return ev;
}

}  // namespace detail

/// f(x, y | z) = Σ_j π_j(z) f(x, y; θ_j).
inline double mixture_density(const MixtureModel& model, CircularAngle x, AxialAngle y,
                              const Eigen::Ref<const Eigen::VectorXd>& z) {
  model.validate();
  const Eigen::VectorXd w = mixing_weights(model, z);
  double s = 0.0;
  for (int j = 0; j < model.J(); ++j) s += w(j) * joint_density(model.components[static_cast<std::size_t>(j)], x, y);
  return s;
}

/// Σ_i log Σ_j π_j(z_i) f(x_i, y_i; θ_j), evaluated with a per-row max shift.
inline double log_likelihood(const MixtureModel& model, const Dataset& data) {
  model.validate();
  return detail::evaluate(model, data).loglik;
}

/// Posterior class probabilities û_ij, n x J; rows sum to one.
inline Eigen::MatrixXd e_step(const MixtureModel& model, const Dataset& data) {
  model.validate();
  return detail::evaluate(model, data).responsibilities;
}

/// Maximizes Σ û_ij log π_j(z_i; β) by weighted multinomial logistic regression.
inline LogitFit m_step_beta(const Eigen::MatrixXd& responsibilities, const Dataset& data,
                            const ConcomitantCoefficients& warm_start) {
  return fit_multinomial_logit(data.z, responsibilities, warm_start);
}

/// IFM update per component: circular marginal, then axial marginal, then ρ with
/// both marginals held at their new estimates. `previous` seeds the axial von Mises search.
inline std::vector<ComponentParams> m_step_theta(const Eigen::MatrixXd& responsibilities, const Dataset& data,
                                                 FamilyPair families,
                                                 const std::vector<ComponentParams>* previous = nullptr) {
  families.validate();
  const int J = static_cast<int>(responsibilities.cols());
  std::vector<ComponentParams> out;
  out.reserve(static_cast<std::size_t>(J));
  std::vector<double> w(data.size()), u(data.size()), v(data.size());
  for (int j = 0; j < J; ++j) {
    const double mass = responsibilities.col(j).sum();
    if (!(mass > 1e-8)) throw ComponentCollapseError(static_cast<std::size_t>(j), mass);
    for (std::size_t i = 0; i < data.size(); ++i) w[i] = responsibilities(static_cast<Eigen::Index>(i), j);
    std::optional<MarginalSpec> axial_init;
    if (previous && previous->size() == static_cast<std::size_t>(J)) axial_init = (*previous)[static_cast<std::size_t>(j)].axial;
    const MarginalSpec circ = weighted_mle(families.circular, data.x, w);
    const MarginalSpec axial = weighted_mle(families.axial, data.y, w, axial_init);
    const Marginal fc(circ);
    const Marginal fa(axial);
    for (std::size_t i = 0; i < data.size(); ++i) {
      u[i] = fc.cdf(data.x[i]);
      v[i] = fa.cdf(data.y[i]);
    }
    out.push_back({circ, axial, rho_mle_from_uniforms(u, v, w)});
  }
  return out;
}

struct FitConfig {
  int restarts = 20;
  double tol = 1e-8;          // relative log-likelihood change
  int consecutive = 3;        // iterations below tol needed to stop
  int max_iter = 500;
  std::uint64_t seed = 20240101;
  unsigned threads = 1;
  // Short-run screening: every start runs `screen_iterations` EM steps, then only
  // the `screen_keep` best continue to convergence. Disabled when screen_iterations <= 0.
  int screen_iterations = 25;
  int screen_keep = 3;
  // Extra starting models tried before the clustering/random starts.
  std::vector<MixtureModel> warm_starts;
};

struct FitResult {
  MixtureModel model;
  double loglik = 0.0;
  std::vector<double> loglik_trace;
  Eigen::MatrixXd responsibilities;
  std::vector<int> classification;  // 0-based component index
  double bic = 0.0;
  int n_params = 0;
  bool converged = false;
  int restarts_used = 0;
  int iterations = 0;
  int loglik_decreases = 0;   // steps with logL drop > 1e-8 in the returned run
  bool ridge_used = false;
  int failed_starts = 0;
  std::size_t n = 0;
};

namespace detail {

inline std::vector<int> map_classification(const Eigen::MatrixXd& resp) {
  std::vector<int> out(static_cast<std::size_t>(resp.rows()));
  for (Eigen::Index i = 0; i < resp.rows(); ++i) {
    Eigen::Index best = 0;
    resp.row(i).maxCoeff(&best);
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

inline Eigen::MatrixXd hard_responsibilities(const std::vector<int>& labels, int J) {
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()), J);
  for (std::size_t i = 0; i < labels.size(); ++i) r(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  return r;
}

/// k-means with k-means++ seeding on (cos x, sin x, cos 2y, sin 2y), which
/// respects both periodicities.
inline std::vector<int> kmeans_labels(const Dataset& data, int J, Rng& rng, int max_iter = 100) {
  const std::size_t n = data.size();
  std::vector<std::array<double, 4>> pts(n);
  for (std::size_t i = 0; i < n; ++i) {
    pts[i] = {std::cos(data.x[i]), std::sin(data.x[i]), std::cos(2.0 * data.y[i]), std::sin(2.0 * data.y[i])};
  }
  auto dist2 = [](const std::array<double, 4>& a, const std::array<double, 4>& b) {
    double s = 0.0;
    for (int k = 0; k < 4; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return s;
  };
  std::vector<std::array<double, 4>> centers;
  centers.push_back(pts[std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)))]);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  while (static_cast<int>(centers.size()) < J) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], dist2(pts[i], centers.back()));
      total += d2[i];
    }
    double target = uniform01(rng) * total;
    std::size_t pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      target -= d2[i];
      if (target < 0.0) {
        pick = i;
        break;
      }
    }
    centers.push_back(pts[pick]);
  }
  std::vector<int> labels(n, -1);
  for (int it = 0; it < max_iter; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (int j = 0; j < J; ++j) {
        const double d = dist2(pts[i], centers[static_cast<std::size_t>(j)]);
        if (d < bd) {
          bd = d;
          best = j;
        }
      }
      if (labels[i] != best) {
        labels[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<std::array<double, 4>> sums(static_cast<std::size_t>(J), {0, 0, 0, 0});
    std::vector<int> counts(static_cast<std::size_t>(J), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto j = static_cast<std::size_t>(labels[i]);
      for (int k = 0; k < 4; ++k) sums[j][k] += pts[i][k];
      ++counts[j];
    }
    for (std::size_t j = 0; j < static_cast<std::size_t>(J); ++j) {
      if (counts[j] == 0) {
        // Reseed an empty cluster at the point farthest from its center.
        std::size_t far = 0;
        double fd = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double d = dist2(pts[i], centers[static_cast<std::size_t>(labels[i])]);
          if (d > fd) {
            fd = d;
            far = i;
          }
        }
        centers[j] = pts[far];
        labels[far] = static_cast<int>(j);
        continue;
      }
      for (int k = 0; k < 4; ++k) centers[j][k] = sums[j][k] / counts[j];
    }
  }
  return labels;
}

inline std::vector<int> random_labels(std::size_t n, int J, Rng& rng) {
  std::vector<int> labels(n);
  for (auto& l : labels) l = std::min(J - 1, static_cast<int>(uniform01(rng) * J));
  return labels;
}

// One EM trajectory.
struct EmRun {
  MixtureModel model;
  Evaluation current;
  std::vector<double> trace;
  int stable = 0;
  int decreases = 0;
  bool converged = false;
  bool ridge = false;
  bool failed = false;
  std::string error;

  void m_step(const Dataset& data, FamilyPair families) {
    const auto comps = m_step_theta(current.responsibilities, data, families,
                                    model.components.empty() ? nullptr : &model.components);
    ConcomitantCoefficients warm = model.components.empty()
                                       ? ConcomitantCoefficients::zeros(static_cast<int>(current.responsibilities.cols()), data.n_coef())
                                       : model.coefficients;
    const LogitFit beta = m_step_beta(current.responsibilities, data, warm);
    ridge = ridge || beta.ridge;
    model.components = comps;
    model.coefficients = beta.coefficients;
  }

  void record(const Dataset& data) {
    current = evaluate(model, data);
    trace.push_back(current.loglik);
  }

  void start_from_responsibilities(const Eigen::MatrixXd& resp, const Dataset& data, FamilyPair families) {
    current.responsibilities = resp;
    m_step(data, families);
    record(data);
  }

  void start_from_model(const MixtureModel& m, const Dataset& data) {
    model = m;
    record(data);
  }

  void iterate(const Dataset& data, FamilyPair families, const FitConfig& cfg, int steps) {
    for (int s = 0; s < steps && !converged && static_cast<int>(trace.size()) <= cfg.max_iter; ++s) {
      const double prev = trace.back();
      m_step(data, families);
      record(data);
      const double now = trace.back();
      if (now < prev - 1e-8) ++decreases;
      if (std::abs(now - prev) < cfg.tol * std::max(std::abs(prev), 1e-300)) {
        if (++stable >= cfg.consecutive) converged = true;
      } else {
        stable = 0;
      }
    }
  }
};

}  // namespace detail

/// EM from several initializations (supplied warm starts, one k-means++ clustering
/// in embedded coordinates, then alternating random multinomial labels and
/// re-seeded clusterings); the run with the highest final log-likelihood wins.
inline FitResult fit(const Dataset& data, FamilyPair families, int J, const FitConfig& config = {}) {
  families.validate();
  if (J < 1) throw DomainError("fit: J must be at least 1");
  if (data.size() <= static_cast<std::size_t>(J)) throw DomainError("fit: need more observations than components");
  if (config.restarts < 1 || config.max_iter < 1 || !(config.tol > 0.0) || config.consecutive < 1) {
    throw DomainError("fit: invalid configuration");
  }
  for (const auto& m : config.warm_starts) {
    m.validate();
    if (m.J() != J || !(m.families() == families)) throw DomainError("fit: warm start has a different shape");
    detail::check_dims(m, data);
  }

  const int n_warm = static_cast<int>(config.warm_starts.size());
  const int n_starts = J == 1 ? 1 : n_warm + config.restarts;
  std::vector<detail::EmRun> runs(static_cast<std::size_t>(n_starts));
  std::vector<int> attempts(static_cast<std::size_t>(n_starts), 0);
  constexpr int kMaxAttempts = 3;

  auto initialize = [&](std::size_t s) {
    auto& run = runs[s];
    while (attempts[s] < kMaxAttempts) {
      const int attempt = attempts[s]++;
      run = detail::EmRun{};
      Rng rng = make_stream(config.seed, s * 16 + static_cast<std::size_t>(attempt));
      try {
        const int k = static_cast<int>(s) - n_warm;
        if (k < 0 && attempt == 0) {
          run.start_from_model(config.warm_starts[s], data);
        } else if (J == 1) {
          run.start_from_responsibilities(Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(data.size()), 1), data, families);
        } else if ((k == 0 || k % 2 == 0) && attempt == 0) {
          run.start_from_responsibilities(detail::hard_responsibilities(detail::kmeans_labels(data, J, rng), J), data,
                                          families);
        } else {
          run.start_from_responsibilities(detail::hard_responsibilities(detail::random_labels(data.size(), J, rng), J),
                                          data, families);
        }
        return;
      } catch (const std::exception& e) {
        run.failed = true;
        run.error = e.what();
      }
    }
  };

  auto advance = [&](std::size_t s, int steps) {
    while (true) {
      auto& run = runs[s];
      if (run.failed) return;
      try {
        run.iterate(data, families, config, steps);
        return;
      } catch (const std::exception& e) {
        // Collapse or numerical failure: a fresh initialization replaces this run.
        run.failed = true;
        run.error = e.what();
        if (attempts[s] >= kMaxAttempts) return;
        initialize(s);
        if (run.failed) return;
      }
    }
  };

  const bool screen = config.screen_iterations > 0 && n_starts > config.screen_keep;
  parallel_for(static_cast<std::size_t>(n_starts), config.threads, [&](std::size_t s) {
    initialize(s);
    advance(s, screen ? config.screen_iterations : config.max_iter);
  });

  std::vector<std::size_t> order(static_cast<std::size_t>(n_starts));
  std::iota(order.begin(), order.end(), 0);
  auto score = [&](std::size_t s) {
    return runs[s].failed ? -std::numeric_limits<double>::infinity() : runs[s].trace.back();
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score(a) > score(b); });

  if (screen) {
    const std::size_t keep = std::min<std::size_t>(order.size(), static_cast<std::size_t>(config.screen_keep));
    parallel_for(keep, config.threads, [&](std::size_t k) { advance(order[k], config.max_iter); });
    std::stable_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep),
                     [&](std::size_t a, std::size_t b) { return score(a) > score(b); });
  }

  int failed = 0;
  int used = 0;
  for (std::size_t s = 0; s < runs.size(); ++s) {
    used += attempts[s];
    if (runs[s].failed) ++failed;
  }
  const std::size_t best = order.front();
  if (runs[best].failed) {
    std::string msg = "fit: all " + std::to_string(n_starts) + " starts failed";
    if (!runs[best].error.empty()) msg += "; last error: " + runs[best].error;
    throw FitFailure(msg);
  }

  auto& run = runs[best];
  FitResult out;
  out.model = std::move(run.model);
  out.loglik = run.current.loglik;
  out.loglik_trace = std::move(run.trace);
  out.responsibilities = std::move(run.current.responsibilities);
  out.classification = detail::map_classification(out.responsibilities);
  out.n = data.size();
  out.n_params = parameter_count(J, data.n_coef());
  out.bic = bic(out.loglik, out.n_params, data.size());
  out.converged = run.converged || J == 1;
  out.restarts_used = used;
  out.iterations = static_cast<int>(out.loglik_trace.size()) - 1;
  out.loglik_decreases = run.decreases;
  out.ridge_used = run.ridge;
  out.failed_starts = failed;
  return out;
}

struct SelectionRow {
  FamilyPair families;
  int J = 0;
  double loglik = std::numeric_limits<double>::quiet_NaN();
  double bic = std::numeric_limits<double>::quiet_NaN();
  int n_params = 0;
  bool converged = false;
  std::string error;  // empty when the fit succeeded
};

struct SelectionResult {
  std::vector<SelectionRow> rows;
  std::vector<std::optional<FitResult>> fits;  // parallel to rows
  std::optional<std::size_t> best;             // index of the BIC minimizer

  const FitResult& best_fit() const {
    if (!best) throw FitFailure("model selection: every fit failed");
    return *fits[*best];
  }
};

/// Fits every (family pair, J) cell and picks the BIC minimizer. Failed cells
/// are recorded, not fatal.
inline SelectionResult select_model(const Dataset& data, const std::vector<FamilyPair>& family_grid,
                                    const std::vector<int>& J_range, const FitConfig& config = {}) {
  if (family_grid.empty() || J_range.empty()) throw DomainError("select_model: empty grid");
  SelectionResult out;
  for (const auto& f : family_grid) {
    for (int J : J_range) {
      SelectionRow row;
      row.families = f;
      row.J = J;
      row.n_params = parameter_count(J, data.n_coef());
      try {
        FitResult r = fit(data, f, J, config);
        row.loglik = r.loglik;
        row.bic = r.bic;
        row.converged = r.converged;
        out.fits.emplace_back(std::move(r));
      } catch (const std::exception& e) {
        row.error = e.what();
        out.fits.emplace_back(std::nullopt);
      }
      out.rows.push_back(row);
    }
  }
  for (std::size_t k = 0; k < out.rows.size(); ++k) {
    if (!out.rows[k].error.empty()) continue;
    if (!out.best || out.rows[k].bic < out.rows[*out.best].bic) out.best = k;
  }
  return out;
}

}  // namespace circmix

#endif  // CIRCMIX_MIXTURE_HPP
