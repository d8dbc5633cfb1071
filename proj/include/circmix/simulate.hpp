#ifndef CIRCMIX_SIMULATE_HPP
#define CIRCMIX_SIMULATE_HPP

// Simulation from concomitant mixtures and the default simulation scenarios.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "circmix/circula.hpp"
#include "circmix/errors.hpp"
#include "circmix/logit.hpp"
#include "circmix/mixture.hpp"
#include "circmix/random.hpp"

namespace circmix {

/// Law of one non-intercept covariate.
struct CovariateLaw {
  enum class Kind { Normal, Bernoulli };
  Kind kind = Kind::Normal;
  double a = 0.0;  // mean, or success probability
  double b = 1.0;  // standard deviation (normal only)
  std::string name;

  static CovariateLaw normal(double mean, double sd, std::string name = {}) {
    return {Kind::Normal, mean, sd, std::move(name)};
  }
  static CovariateLaw bernoulli(double p, std::string name = {}) { return {Kind::Bernoulli, p, 0.0, std::move(name)}; }

  void validate() const {
    if (kind == Kind::Normal && !(std::isfinite(a) && std::isfinite(b) && b > 0.0)) {
      throw DomainError("normal covariate needs a finite mean and sd > 0");
    }
    if (kind == Kind::Bernoulli && !(a >= 0.0 && a <= 1.0)) throw DomainError("bernoulli covariate needs p in [0, 1]");
  }
};

struct Scenario {
  std::string name;
  MixtureModel truth;
  std::size_t n = 600;
  std::vector<CovariateLaw> covariates;
  int replicas = 50;
  std::uint64_t seed = 1;

  void validate() const {
    truth.validate();
    if (n < 2) throw DomainError("scenario: n must be at least 2");
    if (replicas < 1) throw DomainError("scenario: replicas must be positive");
    for (const auto& c : covariates) c.validate();
    if (truth.J() > 1 && truth.coefficients.columns() != static_cast<int>(covariates.size()) + 1) {
      throw DomainError("scenario: coefficient columns must equal covariates + 1");
    }
  }

  std::vector<std::string> covariate_names() const {
    std::vector<std::string> names{"(intercept)"};
    for (std::size_t k = 0; k < covariates.size(); ++k) {
      names.push_back(covariates[k].name.empty() ? "z" + std::to_string(k + 1) : covariates[k].name);
    }
    return names;
  }
};

/// n x (1 + q) design with a leading intercept column.
inline Eigen::MatrixXd generate_covariates(const std::vector<CovariateLaw>& laws, std::size_t n, Rng& rng) {
  Eigen::MatrixXd z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(laws.size()) + 1);
  z.col(0).setOnes();
  for (std::size_t k = 0; k < laws.size(); ++k) {
    laws[k].validate();
    const auto c = static_cast<Eigen::Index>(k) + 1;
    if (laws[k].kind == CovariateLaw::Kind::Normal) {
      std::normal_distribution<double> normal(laws[k].a, laws[k].b);
      for (Eigen::Index i = 0; i < z.rows(); ++i) z(i, c) = normal(rng);
    } else {
      for (Eigen::Index i = 0; i < z.rows(); ++i) z(i, c) = uniform01(rng) < laws[k].a ? 1.0 : 0.0;
    }
  }
  return z;
}

struct SimulatedData {
  Dataset data;
  std::vector<int> labels;  // 0-based generating component
};

/// Draws a class for each row from the logit weights, then (x, y) from that component.
inline SimulatedData simulate_dataset(const MixtureModel& truth, const Eigen::MatrixXd& z, Rng& rng,
                                      std::vector<std::string> covariate_names = {}) {
  truth.validate();
  const auto n = static_cast<std::size_t>(z.rows());
  std::vector<Component> comps;
  for (const auto& c : truth.components) comps.emplace_back(c);
  std::vector<double> x(n), y(n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    int label = 0;
    if (truth.J() > 1) {
      const Eigen::VectorXd w = mixing_weights(truth.coefficients, z.row(static_cast<Eigen::Index>(i)).transpose());
      double u = uniform01(rng);
      label = truth.J() - 1;
      for (int j = 0; j < truth.J(); ++j) {
        if (u < w(j)) {
          label = j;
          break;
        }
        u -= w(j);
      }
    }
    const auto [xi, yi] = comps[static_cast<std::size_t>(label)].sample(rng);
    x[i] = xi.value();
    y[i] = yi.value();
    labels[i] = label;
  }
  return {Dataset::make(std::move(x), std::move(y), z, std::move(covariate_names)), std::move(labels)};
}

inline SimulatedData simulate_scenario(const Scenario& s, Rng& rng) {
  s.validate();
  const Eigen::MatrixXd z = generate_covariates(s.covariates, s.n, rng);
  return simulate_dataset(s.truth, z, rng, s.covariate_names());
}

namespace detail {

inline ComponentParams component(FamilyPair f, double mu_c, double k_c, double mu_a, double k_a, double rho) {
  return {MarginalSpec::make(f.circular, mu_c, k_c), MarginalSpec::make(f.axial, mu_a, k_a), CopulaCorrelation(rho)};
}

}  // namespace detail

/// The eight simulation settings: four family pairs with J = 2 and J = 3,
/// covariates N(0, sd 2) and Bernoulli(0.5), n = 600.
inline std::vector<Scenario> default_scenarios() {
  using detail::component;
  const FamilyPair vm_ax{Family::VMcirc, Family::VMax};
  const FamilyPair vm_axwc{Family::VMcirc, Family::WCax};
  const FamilyPair wc_ax{Family::WCcirc, Family::VMax};
  const FamilyPair wc_axwc{Family::WCcirc, Family::WCax};
  auto coef = [](std::initializer_list<std::initializer_list<double>> rows) {
    Eigen::MatrixXd b(static_cast<Eigen::Index>(rows.size()), 3);
    Eigen::Index r = 0;
    for (const auto& row : rows) {
      Eigen::Index c = 0;
      for (double v : row) b(r, c++) = v;
      ++r;
    }
    return ConcomitantCoefficients(b);
  };
  auto make = [](std::string name, std::vector<ComponentParams> comps, ConcomitantCoefficients beta) {
    Scenario s;
    s.name = std::move(name);
    s.truth.components = std::move(comps);
    s.truth.coefficients = std::move(beta);
    s.covariates = {CovariateLaw::normal(0.0, 2.0, "z1"), CovariateLaw::bernoulli(0.5, "z2")};
    return s;
  };
  const auto beta_j3_a = coef({{-0.09, 0.64, 0.12}, {1.32, 1.17, -2.93}});
  const auto beta_j3_b = coef({{-0.86, 0.37, 0.54}, {0.23, -0.07, -0.19}});
  std::vector<Scenario> out;
  out.push_back(make("VM-AX-J2",
                     {component(vm_ax, 1, 2, 0.5, 2, -0.45), component(vm_ax, 5, 6, 2, 5, 0.6)},
                     coef({{-2.41, 0.55, 2.17}})));
  out.push_back(make("VM-AX-J3",
                     {component(vm_ax, 1, 3, 0.5, 2, -0.45), component(vm_ax, 5, 5, 2, 5, 0.6),
                      component(vm_ax, 3, 10, 1.5, 9, 0.1)},
                     beta_j3_a));
  out.push_back(make("VM-AXWC-J2",
                     {component(vm_axwc, 1, 3, 0.5, 0.3, -0.45), component(vm_axwc, 5, 5, 2, 0.55, 0.6)},
                     coef({{-0.86, 0.23, 0.37}})));
  out.push_back(make("VM-AXWC-J3",
                     {component(vm_axwc, 1, 2, 0.5, 0.3, -0.45), component(vm_axwc, 5, 6, 2, 0.7, 0.6),
                      component(vm_axwc, 3, 10, 1.5, 0.9, 0.1)},
                     beta_j3_b));
  out.push_back(make("WC-AX-J2",
                     {component(wc_ax, 1, 0.3, 0.5, 2, -0.45), component(wc_ax, 5, 0.9, 2, 5, 0.6)},
                     coef({{-1.26, 3.67, 0.69}})));
  out.push_back(make("WC-AX-J3",
                     {component(wc_ax, 1, 0.3, 0.5, 2, -0.45), component(wc_ax, 5, 0.9, 2, 5, 0.6),
                      component(wc_ax, 3, 0.5, 1.5, 9, 0.1)},
                     beta_j3_a));
  out.push_back(make("WC-AXWC-J2",
                     {component(wc_axwc, 1, 0.3, 0.5, 0.3, -0.45), component(wc_axwc, 5, 0.9, 2, 0.7, 0.6)},
                     coef({{-0.86, 0.23, 0.37}})));
  out.push_back(make("WC-AXWC-J3",
                     {component(wc_axwc, 1, 0.3, 0.5, 0.3, -0.45), component(wc_axwc, 5, 0.9, 2, 0.55, 0.6),
                      component(wc_axwc, 3, 0.5, 1.5, 0.9, 0.1)},
                     beta_j3_b));
  for (std::size_t k = 0; k < out.size(); ++k) out[k].seed = 1000 + k;
  return out;
}

inline Scenario find_scenario(const std::string& name) {
  for (auto& s : default_scenarios()) {
    if (s.name == name) return s;
  }
  throw DomainError("unknown scenario '" + name + "'");
}

}  // namespace circmix

#endif  // CIRCMIX_SIMULATE_HPP
