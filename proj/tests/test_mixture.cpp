#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "circmix/alignment.hpp"
#include "circmix/mixture.hpp"
#include "circmix/optimize.hpp"
#include "circmix/quadrature.hpp"
#include "circmix/simulate.hpp"

namespace circmix {
namespace {

ComponentParams make_component(FamilyPair f, double mc, double kc, double ma, double ka, double rho) {
  return {MarginalSpec::make(f.circular, mc, kc), MarginalSpec::make(f.axial, ma, ka), CopulaCorrelation(rho)};
}

const FamilyPair kVmAx{Family::VMcirc, Family::VMax};

SimulatedData scenario_data(const std::string& name, std::uint64_t stream) {
  const Scenario s = find_scenario(name);
  Rng rng = make_stream(s.seed, stream);
  return simulate_scenario(s, rng);
}

Dataset intercept_only(std::vector<double> x, std::vector<double> y) {
  const auto n = static_cast<Eigen::Index>(x.size());
  return Dataset::make(std::move(x), std::move(y), Eigen::MatrixXd::Ones(n, 1));
}

TEST(Dataset, ReducesAnglesAndNamesCovariates) {
  Eigen::MatrixXd z(2, 2);
  z << 1, 0.5, 1, -0.5;
  const Dataset d = Dataset::make({-1.0, 7.0}, {4.0, 0.25}, z);
  EXPECT_NEAR(d.x[0], kTwoPi - 1.0, 1e-15);
  EXPECT_NEAR(d.x[1], 7.0 - kTwoPi, 1e-15);
  EXPECT_NEAR(d.y[0], 4.0 - kPi, 1e-15);
  EXPECT_EQ(d.covariate_names.size(), 2u);
  EXPECT_EQ(d.n_coef(), 2);
}

TEST(Dataset, RejectsMalformedInput) {
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(2, 1);
  EXPECT_THROW(Dataset::make({}, {}, Eigen::MatrixXd::Ones(0, 1)), DomainError);
  EXPECT_THROW(Dataset::make({1.0}, {1.0, 2.0}, ones), DomainError);
  EXPECT_THROW(Dataset::make({1.0, NAN}, {1.0, 2.0}, ones), DomainError);
  EXPECT_THROW(Dataset::make({1.0, 2.0}, {1.0, 2.0}, Eigen::MatrixXd::Constant(2, 1, 2.0)), DomainError);
}

TEST(MixtureModel, ValidatesShape) {
  MixtureModel m;
  EXPECT_THROW(m.validate(), DomainError);
  m.components = {make_component(kVmAx, 1, 2, 0.5, 2, 0.1),
                  make_component({Family::WCcirc, Family::VMax}, 1, 0.2, 0.5, 2, 0.1)};
  m.coefficients = ConcomitantCoefficients::zeros(2, 1);
  EXPECT_THROW(m.validate(), DomainError);
  m.components[1] = make_component(kVmAx, 4, 2, 2, 2, 0.1);
  EXPECT_NO_THROW(m.validate());
  m.coefficients = ConcomitantCoefficients::zeros(3, 1);
  EXPECT_THROW(m.validate(), DomainError);
}

TEST(FamilyPair, NamesRoundTrip) {
  for (const auto& f : all_family_pairs()) EXPECT_EQ(family_pair_from_string(to_string(f)), f);
  EXPECT_EQ(to_string(FamilyPair{Family::WCcirc, Family::WCax}), "WC-AXWC");
  EXPECT_THROW(family_pair_from_string("VM-VM"), DomainError);
}

TEST(Bic, ParameterCountAndIdentity) {
  EXPECT_EQ(parameter_count(3, 5), 25);
  EXPECT_EQ(parameter_count(1, 3), 5);
  EXPECT_EQ(parameter_count(2, 3), 13);
  EXPECT_DOUBLE_EQ(bic(-100.0, 13, 600), 200.0 + 13.0 * std::log(600.0));
}

TEST(LogLikelihood, UniformIndependenceIsClosedForm) {
  MixtureModel m;
  m.components = {make_component(kVmAx, 0, 0, 0, 0, 0)};
  m.coefficients = ConcomitantCoefficients::zeros(1, 1);
  Rng rng(3);
  std::vector<double> x(50), y(50);
  for (int i = 0; i < 50; ++i) {
    x[static_cast<std::size_t>(i)] = kTwoPi * uniform01(rng);
    y[static_cast<std::size_t>(i)] = kPi * uniform01(rng);
  }
  EXPECT_NEAR(log_likelihood(m, intercept_only(x, y)), -50.0 * std::log(2.0 * kPi * kPi), 1e-10);
}

TEST(MixtureDensity, SingleComponentEqualsJointDensity) {
  MixtureModel m;
  m.components = {make_component(kVmAx, 1, 2, 0.5, 2, -0.45)};
  m.coefficients = ConcomitantCoefficients::zeros(1, 3);
  const Eigen::Vector3d z(1.0, 0.7, 1.0);
  for (double x : {0.2, 3.0, 6.0}) {
    for (double y : {0.1, 1.4, 3.0}) {
      EXPECT_NEAR(mixture_density(m, CircularAngle(x), AxialAngle(y), z),
                  joint_density(m.components[0], CircularAngle(x), AxialAngle(y)), 1e-15);
    }
  }
}

TEST(MixtureDensity, IdenticalComponentsIgnoreCoefficients) {
  const auto c = make_component({Family::WCcirc, Family::WCax}, 2, 0.5, 1, 0.6, 0.3);
  MixtureModel m;
  m.components = {c, c};
  Eigen::MatrixXd b(1, 3);
  b << 3.0, -1.0, 0.5;
  m.coefficients = ConcomitantCoefficients(b);
  for (double zz : {-2.0, 0.0, 4.0}) {
    const Eigen::Vector3d z(1.0, zz, 1.0);
    EXPECT_NEAR(mixture_density(m, CircularAngle(1.0), AxialAngle(2.0), z),
                joint_density(c, CircularAngle(1.0), AxialAngle(2.0)), 1e-14);
  }
}

TEST(MixtureDensity, IntegratesToOneForFixedCovariates) {
  const Scenario s = find_scenario("VM-AX-J3");
  const Eigen::Vector3d z(1.0, -1.3, 1.0);
  const auto rx = quad::composite(0.0, kTwoPi, 24, 16);
  const auto ry = quad::composite(0.0, kPi, 24, 16);
  double total = 0.0;
  for (std::size_t i = 0; i < rx.nodes.size(); ++i) {
    for (std::size_t j = 0; j < ry.nodes.size(); ++j) {
      total += rx.weights[i] * ry.weights[j] *
               mixture_density(s.truth, CircularAngle(rx.nodes[i]), AxialAngle(ry.nodes[j]), z);
    }
  }
  EXPECT_NEAR(total, 1.0, 1e-6);
}

TEST(LogLikelihood, MatchesPointwiseAccumulationInReverse) {
  const Scenario s = find_scenario("WC-AX-J3");
  const auto sim = scenario_data("WC-AX-J3", 2);
  double sum = 0.0;
  for (std::size_t k = sim.data.size(); k-- > 0;) {
    sum += std::log(mixture_density(s.truth, CircularAngle(sim.data.x[k]), AxialAngle(sim.data.y[k]),
                                    sim.data.z.row(static_cast<Eigen::Index>(k)).transpose()));
  }
  EXPECT_NEAR(log_likelihood(s.truth, sim.data), sum, 1e-9);
}

TEST(LogLikelihood, InvariantUnderLabelPermutation) {
  const Scenario s = find_scenario("VM-AXWC-J3");
  const auto sim = scenario_data("VM-AXWC-J3", 3);
  const double base = log_likelihood(s.truth, sim.data);
  Permutation perm{0, 1, 2};
  while (std::next_permutation(perm.begin(), perm.end())) {
    EXPECT_NEAR(log_likelihood(permute(s.truth, perm), sim.data), base, 1e-9);
  }
}

TEST(LogLikelihood, CovariateDimensionMismatch) {
  const Scenario s = find_scenario("VM-AX-J2");
  const Dataset d = intercept_only({1.0, 2.0}, {0.5, 1.0});
  EXPECT_THROW(log_likelihood(s.truth, d), DomainError);
}

TEST(EStep, RowsSumToOneAndSymmetricCase) {
  const auto c = make_component(kVmAx, 2, 1, 1, 1, 0.2);
  MixtureModel m;
  m.components = {c, c};
  m.coefficients = ConcomitantCoefficients::zeros(2, 3);
  const auto sim = scenario_data("VM-AX-J2", 4);
  const Eigen::MatrixXd r = e_step(m, sim.data);
  EXPECT_LT((r.array() - 0.5).abs().maxCoeff(), 1e-15);

  const Scenario s = find_scenario("VM-AX-J3");
  const Eigen::MatrixXd r3 = e_step(s.truth, sim.data);
  EXPECT_LT((r3.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-10);
}

TEST(EStep, SingleComponentIsCertain) {
  MixtureModel m;
  m.components = {make_component(kVmAx, 1, 2, 0.5, 2, -0.45)};
  m.coefficients = ConcomitantCoefficients::zeros(1, 3);
  const auto sim = scenario_data("VM-AX-J2", 5);
  EXPECT_TRUE((e_step(m, sim.data).array() == 1.0).all());
}

TEST(EStep, PointAtSeparatedModeIsAssignedToItsComponent) {
  const Scenario s = find_scenario("VM-AX-J2");
  Eigen::MatrixXd z(1, 3);
  z << 1.0, 0.0, 0.0;
  const Dataset d = Dataset::make({1.0}, {0.5}, z);
  EXPECT_GT(e_step(s.truth, d)(0, 0), 0.99);
}

TEST(EStep, SurvivesUnderflowOfEveryComponent) {
  MixtureModel m;
  m.components = {make_component(kVmAx, 0.0, 500, 0.0, 500, 0.0), make_component(kVmAx, 0.3, 500, 0.2, 500, 0.0)};
  m.coefficients = ConcomitantCoefficients::zeros(2, 1);
  const Dataset d = intercept_only({kPi}, {kPi / 2.0});
  const Eigen::MatrixXd r = e_step(m, d);
  EXPECT_TRUE(r.allFinite());
  EXPECT_NEAR(r.sum(), 1.0, 1e-12);
  EXPECT_TRUE(std::isfinite(log_likelihood(m, d)));
}

TEST(MStepTheta, HardLabelsReduceToPerClusterEstimates) {
  const auto sim = scenario_data("VM-AX-J2", 6);
  const Eigen::MatrixXd hard = detail::hard_responsibilities(sim.labels, 2);
  const auto comps = m_step_theta(hard, sim.data, kVmAx);
  for (int j = 0; j < 2; ++j) {
    std::vector<double> xs, ys, ones;
    for (std::size_t i = 0; i < sim.labels.size(); ++i) {
      if (sim.labels[i] != j) continue;
      xs.push_back(sim.data.x[i]);
      ys.push_back(sim.data.y[i]);
      ones.push_back(1.0);
    }
    const auto circ = weighted_mle(Family::VMcirc, xs, ones);
    const auto axial = weighted_mle(Family::VMax, ys, ones);
    EXPECT_NEAR(comps[static_cast<std::size_t>(j)].circ.mu, circ.mu, 1e-12);
    EXPECT_NEAR(comps[static_cast<std::size_t>(j)].circ.kappa, circ.kappa, 1e-9);
    EXPECT_NEAR(comps[static_cast<std::size_t>(j)].axial.mu, axial.mu, 1e-8);
    EXPECT_NEAR(comps[static_cast<std::size_t>(j)].axial.kappa, axial.kappa, 1e-6);
  }
}

TEST(MStepTheta, SingleComponentMatchesRecoveryBands) {
  Rng rng(21);
  const Component truth(make_component(kVmAx, 1, 2, 0.5, 2, -0.45));
  std::vector<double> x, y;
  for (int i = 0; i < 600; ++i) {
    const auto [a, b] = truth.sample(rng);
    x.push_back(a.value());
    y.push_back(b.value());
  }
  const Dataset d = intercept_only(x, y);
  const auto c = m_step_theta(Eigen::MatrixXd::Ones(600, 1), d, kVmAx).front();
  EXPECT_GT(c.circ.mu, 0.92);
  EXPECT_LT(c.circ.mu, 1.09);
  EXPECT_GT(c.circ.kappa, 1.74);
  EXPECT_LT(c.circ.kappa, 2.31);
  EXPECT_GT(c.axial.mu, 0.40);
  EXPECT_LT(c.axial.mu, 0.61);
  EXPECT_GT(c.axial.kappa, 1.70);
  EXPECT_LT(c.axial.kappa, 2.34);
  EXPECT_GT(c.rho.value(), -0.50);
  EXPECT_LT(c.rho.value(), -0.39);

  // Joint maximization over all five parameters, started from the IFM point.
  auto joint = [&](const std::vector<double>& t) {
    if (t[1] <= 0.0 || t[3] <= 0.0 || t[1] > 500.0 || t[3] > 500.0 || std::abs(t[4]) >= 1.0) return -1e300;
    const Component comp({MarginalSpec::make(Family::VMcirc, wrap_circular(t[0]), t[1]),
                          MarginalSpec::make(Family::VMax, wrap_axial(t[2]), t[3]), CopulaCorrelation(t[4])});
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += comp.log_density(x[i], y[i]);
    return s;
  };
  const auto best = opt::nelder_mead_maximize(
      joint, {c.circ.mu, c.circ.kappa, c.axial.mu, c.axial.kappa, c.rho.value()}, std::vector<double>(5, 0.05),
      1e-10, 6000);
  EXPECT_LT(std::abs(best.x[4] - c.rho.value()), 0.05);
}

TEST(MStepTheta, EmptyComponentCollapses) {
  const auto sim = scenario_data("VM-AX-J2", 7);
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(sim.data.size()), 2);
  r.col(0).setOnes();
  EXPECT_THROW(m_step_theta(r, sim.data, kVmAx), ComponentCollapseError);
}

TEST(Fit, SingleComponentIsDirectIfm) {
  const auto sim = scenario_data("VM-AX-J2", 8);
  const FitResult f = fit(sim.data, kVmAx, 1);
  const auto direct = m_step_theta(Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(sim.data.size()), 1), sim.data, kVmAx);
  EXPECT_EQ(f.model.coefficients.beta.rows(), 0);
  EXPECT_NEAR(f.model.components[0].circ.mu, direct[0].circ.mu, 1e-10);
  EXPECT_NEAR(f.model.components[0].rho.value(), direct[0].rho.value(), 1e-8);
  EXPECT_EQ(f.n_params, 5);
}

TEST(Fit, RecoversTwoComponentScenario) {
  const Scenario s = find_scenario("VM-AX-J2");
  const auto sim = scenario_data("VM-AX-J2", 9);
  const FitResult f = fit(sim.data, kVmAx, 2);
  ASSERT_TRUE(f.converged);
  const auto perm = align_labels(s.truth, f.model);
  const MixtureModel m = permute(f.model, perm);
  // Single-dataset sampling spread at n = 600 is well inside these margins.
  for (int j = 0; j < 2; ++j) {
    const auto& est = m.components[static_cast<std::size_t>(j)];
    const auto& tru = s.truth.components[static_cast<std::size_t>(j)];
    EXPECT_LT(arc_distance(est.circ.mu, tru.circ.mu, kTwoPi), 0.15);
    EXPECT_LT(arc_distance(est.axial.mu, tru.axial.mu, kPi), 0.15);
    EXPECT_NEAR(est.circ.kappa / tru.circ.kappa, 1.0, 0.4);
    EXPECT_NEAR(est.axial.kappa / tru.axial.kappa, 1.0, 0.4);
    EXPECT_NEAR(est.rho.value(), tru.rho.value(), 0.12);
  }
  EXPECT_NEAR(m.coefficients.beta(0, 0), -2.41, 0.8);
  EXPECT_NEAR(m.coefficients.beta(0, 1), 0.55, 0.25);
  EXPECT_NEAR(m.coefficients.beta(0, 2), 2.17, 0.8);

  const auto labels = relabel(f.classification, perm);
  int agree = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) agree += labels[i] == sim.labels[i];
  EXPECT_GT(agree / static_cast<double>(labels.size()), 0.8);
}

TEST(Fit, ResultInvariants) {
  const auto sim = scenario_data("WC-AX-J2", 10);
  FitConfig cfg;
  cfg.restarts = 6;
  const FitResult f = fit(sim.data, {Family::WCcirc, Family::VMax}, 2, cfg);
  EXPECT_LT((f.responsibilities.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-10);
  EXPECT_DOUBLE_EQ(f.bic, -2.0 * f.loglik + f.n_params * std::log(static_cast<double>(f.n)));
  EXPECT_EQ(f.n_params, 13);
  for (Eigen::Index i = 0; i < f.responsibilities.rows(); ++i) {
    Eigen::Index best = 0;
    f.responsibilities.row(i).maxCoeff(&best);
    EXPECT_EQ(f.classification[static_cast<std::size_t>(i)], best);
  }
  EXPECT_EQ(f.loglik, f.loglik_trace.back());
  EXPECT_GE(f.loglik, f.loglik_trace.front());
  EXPECT_GE(f.restarts_used, cfg.restarts);
  EXPECT_NEAR(log_likelihood(f.model, sim.data), f.loglik, 1e-9);
  for (Eigen::Index i = 0; i < sim.data.z.rows(); ++i) {
    const Eigen::VectorXd w = mixing_weights(f.model, sim.data.z.row(i).transpose());
    EXPECT_TRUE((w.array() > 0.0).all());
    EXPECT_NEAR(w.sum(), 1.0, 1e-12);
  }
}

TEST(Fit, DeterministicAcrossThreadCounts) {
  const auto sim = scenario_data("VM-AXWC-J2", 11);
  FitConfig cfg;
  cfg.restarts = 6;
  cfg.seed = 99;
  const FitResult a = fit(sim.data, {Family::VMcirc, Family::WCax}, 2, cfg);
  cfg.threads = 3;
  const FitResult b = fit(sim.data, {Family::VMcirc, Family::WCax}, 2, cfg);
  EXPECT_EQ(a.loglik_trace, b.loglik_trace);
  EXPECT_EQ(a.model.coefficients.beta, b.model.coefficients.beta);
}

TEST(Fit, WarmStartAtTruthConvergesNearTruth) {
  const Scenario s = find_scenario("VM-AX-J2");
  const auto sim = scenario_data("VM-AX-J2", 12);
  FitConfig cfg;
  cfg.warm_starts = {s.truth};
  cfg.restarts = 1;
  cfg.screen_iterations = 0;
  const FitResult f = fit(sim.data, kVmAx, 2, cfg);
  EXPECT_TRUE(f.converged);
  const MixtureModel m = permute(f.model, align_labels(s.truth, f.model));
  for (int j = 0; j < 2; ++j) {
    EXPECT_LT(arc_distance(m.components[static_cast<std::size_t>(j)].circ.mu,
                           s.truth.components[static_cast<std::size_t>(j)].circ.mu, kTwoPi),
              0.15);
  }
  EXPECT_EQ(f.restarts_used, 2);
}

TEST(Fit, RejectsInvalidRequests) {
  const auto sim = scenario_data("VM-AX-J2", 13);
  EXPECT_THROW(fit(sim.data, kVmAx, 0), DomainError);
  EXPECT_THROW(fit(sim.data, {Family::VMax, Family::VMcirc}, 2), DomainError);
  FitConfig bad;
  bad.restarts = 0;
  EXPECT_THROW(fit(sim.data, kVmAx, 2, bad), DomainError);
  EXPECT_THROW(fit(intercept_only({1.0, 2.0}, {0.1, 0.2}), kVmAx, 2), DomainError);
  FitConfig wrong;
  wrong.warm_starts = {find_scenario("VM-AX-J3").truth};
  EXPECT_THROW(fit(sim.data, kVmAx, 2, wrong), DomainError);
}

TEST(SelectModel, SingleClassRowPerFamilyPicksLargestLikelihood) {
  const auto sim = scenario_data("WC-AXWC-J2", 14);
  const SelectionResult r = select_model(sim.data, all_family_pairs(), {1});
  ASSERT_EQ(r.rows.size(), 4u);
  ASSERT_TRUE(r.best.has_value());
  for (const auto& row : r.rows) {
    EXPECT_TRUE(row.error.empty());
    EXPECT_LE(row.loglik, r.rows[*r.best].loglik);
  }
}

TEST(SelectModel, PrefersGeneratingNumberOfComponents) {
  const auto sim = scenario_data("VM-AX-J2", 15);
  FitConfig cfg;
  cfg.restarts = 8;
  const SelectionResult r = select_model(sim.data, {kVmAx}, {1, 2, 3}, cfg);
  ASSERT_EQ(r.rows.size(), 3u);
  ASSERT_TRUE(r.best.has_value());
  EXPECT_EQ(r.rows[*r.best].J, 2);
  EXPECT_EQ(r.best_fit().model.J(), 2);
}

TEST(SelectModel, EmptyGridIsRejected) {
  const auto sim = scenario_data("VM-AX-J2", 16);
  EXPECT_THROW(select_model(sim.data, {}, {1}), DomainError);
}

}  // namespace
}  // namespace circmix
