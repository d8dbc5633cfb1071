#ifndef CIRCMIX_SIMSTUDY_HPP
#define CIRCMIX_SIMSTUDY_HPP

// Parameter-recovery and classification-accuracy study over simulated replicas.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "circmix/alignment.hpp"
#include "circmix/bootstrap.hpp"
#include "circmix/errors.hpp"
#include "circmix/mixture.hpp"
#include "circmix/parallel.hpp"
#include "circmix/random.hpp"
#include "circmix/simulate.hpp"

namespace circmix {

/// Fraction of rows whose label agrees after mapping `estimated` through `perm`.
inline double classification_accuracy(const std::vector<int>& truth, const std::vector<int>& estimated,
                                       const Permutation& perm) {
  if (truth.size() != estimated.size() || truth.empty()) throw DomainError("accuracy: label vectors differ in length");
  const auto mapped = relabel(estimated, perm);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) agree += mapped[i] == truth[i];
  return static_cast<double>(agree) / static_cast<double>(truth.size());
}

struct ParameterSummary {
  ParameterInfo info;
  double truth = 0.0;
  double mean = 0.0;   // locations: mean of estimates unwrapped around the truth
  double lower = 0.0;  // 95% equal-tail band across replicas
  double upper = 0.0;
};

struct ReplicaOutcome {
  int index = 0;
  bool ok = false;
  double accuracy = 0.0;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  int loglik_decreases = 0;
  std::vector<double> parameters;  // aligned to the truth
  std::string error;
};

struct RecoveryReport {
  std::string scenario;
  FamilyPair families;
  int J = 0;
  std::size_t n = 0;
  int replicas = 0;
  std::vector<ParameterSummary> parameters;
  std::vector<ReplicaOutcome> outcomes;
  double median_accuracy = 0.0;
  double mean_accuracy = 0.0;
  int failures = 0;
  bool failure_flag = false;  // more than 5% of replicas failed
};

inline double median(std::vector<double> v) {
  if (v.empty()) throw DomainError("median of an empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// Simulates `scenario.replicas` datasets, fits each at the true J and family
/// pair, aligns labels to the truth and aggregates estimates and accuracy.
/// Replica r draws its data from stream 2r and seeds its fit from stream 2r + 1.
inline RecoveryReport run_recovery_study(const Scenario& scenario, const FitConfig& fit_config = {},
                                         unsigned threads = 1) {
  scenario.validate();
  const MixtureModel& truth = scenario.truth;
  RecoveryReport out;
  out.scenario = scenario.name;
  out.families = truth.families();
  out.J = truth.J();
  out.n = scenario.n;
  out.replicas = scenario.replicas;
  out.outcomes.resize(static_cast<std::size_t>(scenario.replicas));

  parallel_for(out.outcomes.size(), threads, [&](std::size_t r) {
    auto& o = out.outcomes[r];
    o.index = static_cast<int>(r);
    try {
      Rng rng = make_stream(scenario.seed, 2 * r);
      const SimulatedData sim = simulate_scenario(scenario, rng);
      FitConfig cfg = fit_config;
      cfg.seed = derive_seed(scenario.seed, 2 * r + 1);
      cfg.threads = 1;
      const FitResult f = fit(sim.data, out.families, out.J, cfg);
      const Permutation perm = align_labels(truth, f.model);
      o.accuracy = classification_accuracy(sim.labels, f.classification, perm);
      o.parameters = flatten(permute(f.model, perm));
      o.loglik = f.loglik;
      o.iterations = f.iterations;
      o.converged = f.converged;
      o.loglik_decreases = f.loglik_decreases;
      o.ok = true;
    } catch (const std::exception& e) {
      o.error = e.what();
    }
  });

  std::vector<double> acc;
  std::vector<std::vector<double>> good;
  for (const auto& o : out.outcomes) {
    if (!o.ok) {
      ++out.failures;
      continue;
    }
    acc.push_back(o.accuracy);
    good.push_back(o.parameters);
  }
  out.failure_flag = out.failures > 0.05 * scenario.replicas;
  if (acc.empty()) throw FitFailure("recovery study: every replica failed");
  out.median_accuracy = median(acc);
  double s = 0.0;
  for (double a : acc) s += a;
  out.mean_accuracy = s / static_cast<double>(acc.size());

  const auto layout = parameter_layout(truth, scenario.covariate_names());
  const auto true_values = flatten(truth);
  for (std::size_t k = 0; k < layout.size(); ++k) {
    ParameterSummary ps{layout[k], true_values[k], 0.0, 0.0, 0.0};
    std::vector<double> col;
    for (const auto& g : good) col.push_back(g[k]);
    if (layout[k].kind == ParameterKind::Linear) {
      for (double v : col) ps.mean += v;
      ps.mean /= static_cast<double>(col.size());
    } else {
      for (double v : col) ps.mean += ps.truth + wrap_signed(v - ps.truth, layout[k].period());
      ps.mean = wrap(ps.mean / static_cast<double>(col.size()), layout[k].period());
    }
    if (col.size() >= 2) {
      const auto [lo, hi] = layout[k].kind == ParameterKind::Linear
                                ? et_interval(col, 0.95)
                                : circular_et_interval(col, 0.95, ps.truth, layout[k].period());
      ps.lower = lo;
      ps.upper = hi;
    } else {
      ps.lower = ps.upper = col.front();
    }
    out.parameters.push_back(ps);
  }
  return out;
}

}  // namespace circmix

#endif  // CIRCMIX_SIMSTUDY_HPP
