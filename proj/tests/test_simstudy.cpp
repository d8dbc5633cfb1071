#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "circmix/simstudy.hpp"
#include "test_support.hpp"

namespace circmix {
namespace {

TEST(Covariates, InterceptNormalAndBernoulliColumns) {
  Rng rng(1);
  const Eigen::MatrixXd z =
      generate_covariates({CovariateLaw::normal(0.0, 2.0), CovariateLaw::bernoulli(0.5)}, 20000, rng);
  ASSERT_EQ(z.cols(), 3);
  EXPECT_TRUE((z.col(0).array() == 1.0).all());
  const double mean = z.col(1).mean();
  const double sd = std::sqrt((z.col(1).array() - mean).square().mean());
  EXPECT_NEAR(mean, 0.0, 0.05);
  EXPECT_NEAR(sd, 2.0, 0.05);
  EXPECT_TRUE((z.col(2).array() == 0.0 || z.col(2).array() == 1.0).all());
  EXPECT_NEAR(z.col(2).mean(), 0.5, 0.02);
}

TEST(Covariates, RejectInvalidLaws) {
  Rng rng(2);
  EXPECT_THROW(generate_covariates({CovariateLaw::normal(0.0, 0.0)}, 5, rng), DomainError);
  EXPECT_THROW(generate_covariates({CovariateLaw::bernoulli(1.5)}, 5, rng), DomainError);
}

TEST(Scenario, DefaultSetIsValid) {
  const auto all = default_scenarios();
  ASSERT_EQ(all.size(), 8u);
  for (const auto& s : all) {
    EXPECT_NO_THROW(s.validate()) << s.name;
    EXPECT_EQ(s.n, 600u);
    EXPECT_EQ(s.truth.coefficients.columns(), 3);
  }
  EXPECT_EQ(find_scenario("WC-AXWC-J3").truth.J(), 3);
  EXPECT_THROW(find_scenario("nope"), DomainError);
  Scenario bad = all.front();
  bad.n = 1;
  EXPECT_THROW(bad.validate(), DomainError);
}

TEST(Simulate, SingleComponentLabelsAreAllFirst) {
  MixtureModel m;
  m.components = {{MarginalSpec::make(Family::VMcirc, 1, 2), MarginalSpec::make(Family::VMax, 0.5, 2),
                   CopulaCorrelation(-0.45)}};
  m.coefficients = ConcomitantCoefficients::zeros(1, 1);
  Rng rng(3);
  const auto sim = simulate_dataset(m, Eigen::MatrixXd::Ones(100, 1), rng);
  for (int l : sim.labels) EXPECT_EQ(l, 0);
  EXPECT_EQ(sim.data.size(), 100u);
}

TEST(Simulate, SaturatedLogitSendsEveryRowToSecondClass) {
  Scenario s = find_scenario("VM-AX-J2");
  s.truth.coefficients.beta << 20.0, 0.0, 0.0;
  Rng rng(4);
  const auto sim = simulate_scenario(s, rng);
  int second = 0;
  for (int l : sim.labels) second += l == 1;
  EXPECT_GE(second, 599);
}

TEST(Simulate, ClassShareMatchesAverageWeight) {
  const Scenario s = find_scenario("VM-AX-J2");
  Rng rng(5);
  const auto sim = simulate_scenario(s, rng);
  double expected = 0.0;
  int observed = 0;
  for (std::size_t i = 0; i < sim.data.size(); ++i) {
    expected += mixing_weights(s.truth, sim.data.z.row(static_cast<Eigen::Index>(i)).transpose())(1);
    observed += sim.labels[i] == 1;
  }
  EXPECT_NEAR(observed / 600.0, expected / 600.0, 0.05);
}

TEST(Simulate, SameStreamSameData) {
  const Scenario s = find_scenario("WC-AX-J3");
  Rng a = make_stream(s.seed, 7), b = make_stream(s.seed, 7);
  const auto x = simulate_scenario(s, a);
  const auto y = simulate_scenario(s, b);
  EXPECT_EQ(x.data.x, y.data.x);
  EXPECT_EQ(x.data.y, y.data.y);
  EXPECT_EQ(x.labels, y.labels);
  EXPECT_TRUE(x.data.z == y.data.z);
}

// Pooled draws from each component at rho = 0 against that component's marginals.
TEST(Simulate, IndependentComponentsReproduceMarginals) {
  for (const auto& f : all_family_pairs()) {
    MixtureModel m;
    const bool vc = f.circular == Family::VMcirc, va = f.axial == Family::VMax;
    m.components = {{MarginalSpec::make(f.circular, 1.0, vc ? 2.0 : 0.4), MarginalSpec::make(f.axial, 0.5, va ? 2.0 : 0.5),
                     CopulaCorrelation(0.0)},
                    {MarginalSpec::make(f.circular, 4.0, vc ? 6.0 : 0.8), MarginalSpec::make(f.axial, 2.0, va ? 5.0 : 0.7),
                     CopulaCorrelation(0.0)}};
    m.coefficients = ConcomitantCoefficients::zeros(2, 1);
    Rng rng(6);
    const auto sim = simulate_dataset(m, Eigen::MatrixXd::Ones(20000, 1), rng);
    for (int j = 0; j < 2; ++j) {
      const Marginal mc(m.components[static_cast<std::size_t>(j)].circ);
      const Marginal ma(m.components[static_cast<std::size_t>(j)].axial);
      constexpr int kBins = 20;
      std::vector<double> ox(kBins, 0.0), oy(kBins, 0.0), ex(kBins), ey(kBins);
      double count = 0.0;
      for (std::size_t i = 0; i < sim.labels.size(); ++i) {
        if (sim.labels[i] != j) continue;
        count += 1.0;
        // Bin on the probability scale so expected counts are equal.
        ox[std::min(kBins - 1, static_cast<int>(mc.cdf(sim.data.x[i]) * kBins))] += 1.0;
        oy[std::min(kBins - 1, static_cast<int>(ma.cdf(sim.data.y[i]) * kBins))] += 1.0;
      }
      for (int b = 0; b < kBins; ++b) ex[static_cast<std::size_t>(b)] = ey[static_cast<std::size_t>(b)] = count / kBins;
      EXPECT_GT(testing::chi_square_pvalue(ox, ex), 0.01) << to_string(f) << " circular j=" << j;
      EXPECT_GT(testing::chi_square_pvalue(oy, ey), 0.01) << to_string(f) << " axial j=" << j;
    }
  }
}

TEST(Accuracy, InvariantToConsistentRelabeling) {
  const std::vector<int> truth{0, 0, 1, 2, 2, 1};
  const std::vector<int> est{2, 2, 0, 1, 1, 1};
  // est component 2 is truth 0, est 0 is truth 1, est 1 is truth 2.
  const Permutation perm{2, 0, 1};
  EXPECT_NEAR(classification_accuracy(truth, est, perm), 5.0 / 6.0, 1e-15);
  const Permutation other{1, 2, 0};
  std::vector<int> truth2(truth.size()), est2(est.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    truth2[i] = inverse(other)[static_cast<std::size_t>(truth[i])];
    est2[i] = inverse(other)[static_cast<std::size_t>(est[i])];
  }
  Permutation composed(3);
  for (int j = 0; j < 3; ++j) {
    composed[static_cast<std::size_t>(j)] =
        inverse(other)[static_cast<std::size_t>(perm[static_cast<std::size_t>(other[static_cast<std::size_t>(j)])])];
  }
  EXPECT_NEAR(classification_accuracy(truth2, est2, composed), 5.0 / 6.0, 1e-15);
  EXPECT_THROW(classification_accuracy({0}, {0, 1}, {0, 1}), DomainError);
}

TEST(Median, OddAndEven) {
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
  EXPECT_THROW(median({}), DomainError);
}

TEST(RecoveryStudy, SmallRunIsConsistentAndRepeatable) {
  Scenario s = find_scenario("VM-AX-J2");
  s.replicas = 3;
  FitConfig cfg;
  cfg.restarts = 4;
  const RecoveryReport a = run_recovery_study(s, cfg);
  EXPECT_EQ(a.outcomes.size(), 3u);
  EXPECT_EQ(a.failures, 0);
  EXPECT_FALSE(a.failure_flag);
  ASSERT_EQ(a.parameters.size(), 13u);
  for (const auto& o : a.outcomes) {
    EXPECT_TRUE(o.ok);
    EXPECT_GE(o.accuracy, 0.0);
    EXPECT_LE(o.accuracy, 1.0);
  }
  EXPECT_GT(a.median_accuracy, 0.8);
  const auto& rho2 = a.parameters[9];
  EXPECT_EQ(rho2.info.label(), "rho[2]");
  EXPECT_EQ(rho2.truth, 0.6);
  EXPECT_LE(rho2.lower, rho2.upper);

  const RecoveryReport b = run_recovery_study(s, cfg, 2);
  for (std::size_t r = 0; r < a.outcomes.size(); ++r) {
    EXPECT_EQ(a.outcomes[r].parameters, b.outcomes[r].parameters);
    EXPECT_EQ(a.outcomes[r].accuracy, b.outcomes[r].accuracy);
  }
}

}  // namespace
}  // namespace circmix
