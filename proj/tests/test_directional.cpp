#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "circmix/directional.hpp"
#include "circmix/quadrature.hpp"
#include "test_support.hpp"

namespace circmix {
namespace {

const std::vector<Family> kAllFamilies{Family::VMcirc, Family::WCcirc, Family::VMax, Family::WCax};

std::vector<MarginalSpec> parameter_grid() {
  std::vector<MarginalSpec> out;
  for (Family f : kAllFamilies) {
    for (double kappa : {0.0, 0.3, 0.9, 1.0, 4.0}) {
      if (kappa > kappa_max(f)) continue;
      for (double mu : {0.0, 1.0, 2.5}) out.push_back(MarginalSpec::make(f, mu, kappa));
    }
  }
  return out;
}

TEST(MarginalSpec, ReducesLocationModuloPeriod) {
  EXPECT_NEAR(MarginalSpec::make(Family::VMcirc, -1.0, 1.0).mu, kTwoPi - 1.0, 1e-15);
  EXPECT_NEAR(MarginalSpec::make(Family::VMax, 4.0, 1.0).mu, 4.0 - kPi, 1e-15);
  EXPECT_DOUBLE_EQ(MarginalSpec::make(Family::WCax, kPi, 0.2).mu, 0.0);
}

TEST(MarginalSpec, RejectsInadmissibleConcentration) {
  EXPECT_THROW(MarginalSpec::make(Family::WCcirc, 0.0, 1.0), DomainError);
  EXPECT_THROW(MarginalSpec::make(Family::WCax, 0.0, -0.1), DomainError);
  EXPECT_THROW(MarginalSpec::make(Family::VMcirc, 0.0, -1.0), DomainError);
  EXPECT_THROW(pdf(MarginalSpec{Family::VMax, 3.5, 1.0}, 0.2), DomainError);
}

TEST(Angles, ConstructionReducesModuloPeriod) {
  EXPECT_NEAR(CircularAngle(-0.5).value(), kTwoPi - 0.5, 1e-15);
  EXPECT_NEAR(CircularAngle(7.0).value(), 7.0 - kTwoPi, 1e-15);
  EXPECT_NEAR(AxialAngle(degrees_to_radians(190.0)).value(), 0.17453292519943295, 1e-14);
  EXPECT_LT(CircularAngle(-1e-300).value(), kTwoPi);
}

TEST(Pdf, WrappedCauchyZeroConcentrationIsUniform) {
  EXPECT_NEAR(pdf(MarginalSpec::make(Family::WCcirc, kPi, 0.0), 1.0), 0.159155, 1e-6);
}

TEST(Pdf, VonMisesMatchesBesselIntegral) {
  const double i0 = testing::bessel_i0_integral(2.0);
  EXPECT_NEAR(special::bessel_i0(2.0), i0, 1e-12);
  EXPECT_NEAR(pdf(MarginalSpec::make(Family::VMcirc, 1.0, 2.0), 1.0), std::exp(2.0) / (kTwoPi * i0), 1e-12);
  EXPECT_NEAR(pdf(MarginalSpec::make(Family::VMcirc, 1.0, 2.0), 1.0), 0.51588, 1e-5);
}

TEST(Pdf, AxialWrappedCauchyHandEvaluation) {
  // (1/π)(1 - 0.5⁴) / (1 + 0.5⁴ - 2·0.25) at y = μ.
  EXPECT_NEAR(pdf(MarginalSpec::make(Family::WCax, 1.0, 0.5), 1.0), 0.9375 / 0.5625 / kPi, 1e-14);
}

TEST(Pdf, NormalizesOverOnePeriod) {
  for (const auto& s : parameter_grid()) {
    const Marginal m(s);
    const double total = quad::integrate([&](double t) { return m.pdf(t); }, 0.0, s.period());
    EXPECT_NEAR(total, 1.0, 1e-8) << to_string(s.family) << " mu=" << s.mu << " kappa=" << s.kappa;
  }
}

TEST(Pdf, IsPeriodic) {
  Rng rng(11);
  for (const auto& s : parameter_grid()) {
    const Marginal m(s);
    for (int i = 0; i < 20; ++i) {
      const double t = 10.0 * uniform01(rng) - 5.0;
      EXPECT_NEAR(m.pdf(t), m.pdf(t + s.period()), 1e-12 * (1.0 + m.pdf(t)));
    }
  }
}

TEST(Pdf, AxialVonMisesIsWrappedCircularVonMises) {
  Rng rng(3);
  for (double kappa : {0.3, 1.0, 4.0, 20.0}) {
    for (double mu : {0.0, 0.7, 2.9}) {
      const Marginal ax(MarginalSpec::make(Family::VMax, mu, kappa));
      const Marginal circ(MarginalSpec::make(Family::VMcirc, mu, kappa));
      for (int i = 0; i < 20; ++i) {
        const double y = kPi * uniform01(rng);
        EXPECT_NEAR(ax.pdf(y), circ.pdf(y) + circ.pdf(y + kPi), 1e-12);
      }
    }
  }
}

TEST(Pdf, AxialWrappedCauchyIsWrappedCircularWrappedCauchy) {
  const Marginal ax(MarginalSpec::make(Family::WCax, 0.4, 0.6));
  const Marginal circ(MarginalSpec::make(Family::WCcirc, 0.4, 0.6));
  for (double y = 0.0; y < kPi; y += 0.1) EXPECT_NEAR(ax.pdf(y), circ.pdf(y) + circ.pdf(y + kPi), 1e-12);
}

TEST(Cdf, UniformReductions) {
  for (Family f : {Family::VMcirc, Family::WCcirc}) {
    EXPECT_DOUBLE_EQ(cdf(MarginalSpec::make(f, 2.0, 0.0), kPi), 0.5);
    EXPECT_DOUBLE_EQ(inv_cdf(MarginalSpec::make(f, 2.0, 0.0), 0.25), kPi / 2.0);
    EXPECT_DOUBLE_EQ(pdf(MarginalSpec::make(f, 2.0, 0.0), 0.3), 1.0 / kTwoPi);
  }
  for (Family f : {Family::VMax, Family::WCax}) {
    EXPECT_DOUBLE_EQ(cdf(MarginalSpec::make(f, 1.0, 0.0), kPi / 4.0), 0.25);
    EXPECT_DOUBLE_EQ(inv_cdf(MarginalSpec::make(f, 1.0, 0.0), 0.5), kPi / 2.0);
    EXPECT_DOUBLE_EQ(pdf(MarginalSpec::make(f, 1.0, 0.0), 0.3), 1.0 / kPi);
  }
}

TEST(Cdf, VonMisesMatchesTrapezoidOracle) {
  const auto s = MarginalSpec::make(Family::VMcirc, 1.0, 2.0);
  const Marginal m(s);
  const double oracle = testing::trapezoid([&](double t) { return m.pdf(t); }, 0.0, 1.0, 1000000);
  EXPECT_NEAR(cdf(s, 1.0), oracle, 1e-8);
  EXPECT_NEAR(cdf(s, 1.0), 0.38957773695503667, 1e-12);
}

TEST(Cdf, MatchesAdaptiveQuadratureEverywhere) {
  Rng rng(5);
  for (const auto& s : parameter_grid()) {
    const Marginal m(s);
    for (int i = 0; i < 10; ++i) {
      const double t = s.period() * uniform01(rng);
      const double q = quad::integrate([&](double x) { return m.pdf(x); }, 0.0, t);
      EXPECT_NEAR(m.cdf(t), q, 1e-11) << to_string(s.family) << " kappa=" << s.kappa;
    }
  }
}

TEST(Cdf, StartsAtZeroEndsAtOneAndIsMonotone) {
  for (const auto& s : parameter_grid()) {
    const Marginal m(s);
    EXPECT_DOUBLE_EQ(m.cdf(0.0), 0.0);
    EXPECT_NEAR(m.cdf(std::nextafter(s.period(), 0.0)), 1.0, 1e-12);
    double prev = 0.0;
    for (int i = 1; i <= 2000; ++i) {
      const double v = m.cdf(s.period() * i / 2001.0);
      EXPECT_GE(v, prev - 1e-15);
      prev = v;
    }
  }
}

TEST(Cdf, HighConcentrationStaysAccurate) {
  for (Family f : {Family::VMcirc, Family::VMax}) {
    const auto s = MarginalSpec::make(f, 0.5, 400.0);
    const Marginal m(s);
    for (double t : {0.3, 0.49, 0.5, 0.52, 0.8}) {
      const double q = quad::integrate([&](double x) { return m.pdf(x); }, 0.0, t);
      EXPECT_NEAR(m.cdf(t), q, 1e-10);
    }
  }
}

TEST(InvCdf, WrappedCauchySymmetry) {
  const auto s = MarginalSpec::make(Family::WCcirc, kPi, 0.5);
  EXPECT_NEAR(inv_cdf(s, 0.5), kPi, 1e-12);
  // Bisection oracle.
  double lo = 0.0, hi = kTwoPi;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (cdf(s, mid) < 0.5 ? lo : hi) = mid;
  }
  EXPECT_NEAR(inv_cdf(s, 0.5), lo, 1e-12);
}

TEST(InvCdf, RejectsOutOfRangeProbability) {
  const auto s = MarginalSpec::make(Family::VMcirc, 1.0, 1.0);
  EXPECT_THROW(inv_cdf(s, 1.0), DomainError);
  EXPECT_THROW(inv_cdf(s, -0.1), DomainError);
}

TEST(InvCdf, RoundTrips) {
  Rng rng(17);
  for (const auto& s : parameter_grid()) {
    const Marginal m(s);
    for (int i = 0; i < 100; ++i) {
      const double u = uniform01(rng);
      const double t = m.inv_cdf(u);
      EXPECT_GE(t, 0.0);
      EXPECT_LT(t, s.period());
      EXPECT_NEAR(m.cdf(t), u, 1e-10);
      const double x = s.period() * uniform01(rng);
      const double back = m.inv_cdf(std::min(m.cdf(x), std::nextafter(1.0, 0.0)));
      EXPECT_NEAR(arc_distance(back, x, s.period()), 0.0, 1e-8) << to_string(s.family) << " kappa=" << s.kappa;
    }
  }
}

TEST(Sample, UniformHasVanishingResultant) {
  Rng rng(1);
  const Marginal m(MarginalSpec::make(Family::VMcirc, 0.0, 0.0));
  double c = 0.0, s = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double t = m.sample(rng);
    c += std::cos(t);
    s += std::sin(t);
  }
  EXPECT_LT(std::hypot(c, s) / n, 0.01);
}

TEST(Sample, VonMisesCircularMean) {
  Rng rng(2);
  const Marginal m(MarginalSpec::make(Family::VMcirc, 1.0, 2.0));
  double c = 0.0, s = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double t = m.sample(rng);
    c += std::cos(t);
    s += std::sin(t);
  }
  EXPECT_NEAR(std::atan2(s, c), 1.0, 0.02);
}

TEST(Sample, AxialWrappedCauchyChiSquare) {
  Rng rng(4);
  const Marginal m(MarginalSpec::make(Family::WCax, 1.0, 0.7));
  const int bins = 50;
  const int n = 100000;
  std::vector<double> observed(bins, 0.0), expected(bins);
  for (int i = 0; i < n; ++i) {
    const auto b = std::min(bins - 1, static_cast<int>(m.sample(rng) / kPi * bins));
    observed[static_cast<std::size_t>(b)] += 1.0;
  }
  for (int b = 0; b < bins; ++b) {
    const double mass = quad::integrate([&](double t) { return m.pdf(t); }, kPi * b / bins, kPi * (b + 1) / bins);
    expected[static_cast<std::size_t>(b)] = n * mass;
  }
  EXPECT_GT(testing::chi_square_pvalue(observed, expected), 0.01);
}

std::vector<double> draw(const MarginalSpec& s, int n, std::uint64_t seed) {
  Rng rng(seed);
  const Marginal m(s);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (auto& t : out) t = m.sample(rng);
  return out;
}

TEST(WeightedMle, VonMisesCircularRecovery) {
  const auto data = draw(MarginalSpec::make(Family::VMcirc, 5.0, 6.0), 600, 21);
  const std::vector<double> w(data.size(), 1.0);
  const auto est = weighted_mle(Family::VMcirc, data, w);
  EXPECT_GT(est.mu, 4.94);
  EXPECT_LT(est.mu, 5.07);
  EXPECT_GT(est.kappa, 4.87);
  EXPECT_LT(est.kappa, 8.16);
}

TEST(WeightedMle, WrappedCauchyCircularRecovery) {
  const auto data = draw(MarginalSpec::make(Family::WCcirc, 5.0, 0.9), 600, 22);
  const std::vector<double> w(data.size(), 1.0);
  const auto est = weighted_mle(Family::WCcirc, data, w);
  EXPECT_GT(est.mu, 4.98);
  EXPECT_LT(est.mu, 5.02);
  EXPECT_GT(est.kappa, 0.88);
  EXPECT_LT(est.kappa, 0.92);
}

TEST(WeightedMle, InvariantToWeightScale) {
  for (Family f : kAllFamilies) {
    const auto truth = MarginalSpec::make(f, 1.2, is_von_mises(f) ? 2.0 : 0.6);
    const auto data = draw(truth, 300, 23);
    const std::vector<double> ones(data.size(), 1.0), halves(data.size(), 0.5);
    const auto a = weighted_mle(f, data, ones);
    const auto b = weighted_mle(f, data, halves);
    EXPECT_NEAR(a.mu, b.mu, 1e-8) << to_string(f);
    EXPECT_NEAR(a.kappa, b.kappa, 1e-7 * (1.0 + a.kappa)) << to_string(f);
  }
}

TEST(WeightedMle, RejectsDegenerateWeights) {
  const std::vector<double> data{0.1, 0.2, 0.3};
  const std::vector<double> zeros(3, 0.0);
  for (Family f : kAllFamilies) EXPECT_THROW(weighted_mle(f, data, zeros), DegenerateInputError);
  EXPECT_THROW(weighted_mle(Family::VMcirc, data, std::vector<double>{1.0}), DomainError);
  EXPECT_THROW(weighted_mle(Family::VMcirc, std::vector<double>{}, std::vector<double>{}), DomainError);
}

TEST(WeightedMle, ConcentratedDataHitsTheCap) {
  const std::vector<double> data(10, 0.7);
  const std::vector<double> w(10, 1.0);
  EXPECT_DOUBLE_EQ(weighted_mle(Family::VMcirc, data, w).kappa, kVonMisesKappaMax);
  EXPECT_NEAR(weighted_mle(Family::VMax, data, w).kappa, kVonMisesKappaMax, 1e-6);
  EXPECT_NEAR(weighted_mle(Family::WCcirc, data, w).kappa, kWrappedCauchyKappaMax, 1e-9);
  EXPECT_NEAR(weighted_mle(Family::WCax, data, w).kappa, kWrappedCauchyKappaMax, 1e-9);
  EXPECT_NEAR(weighted_mle(Family::WCax, data, w).mu, 0.7, 1e-9);
}

// Brute-force oracle: the estimate must beat every point of a 100 x 100 grid.
TEST(WeightedMle, DominatesGridOracle) {
  Rng rng(31);
  for (Family f : kAllFamilies) {
    for (int rep = 0; rep < 4; ++rep) {
      const double kappa = is_von_mises(f) ? 0.5 + 6.0 * uniform01(rng) : 0.1 + 0.8 * uniform01(rng);
      const auto data = draw(MarginalSpec::make(f, 3.0 * uniform01(rng), kappa), 200, 100 + rep);
      std::vector<double> w(data.size());
      for (auto& x : w) x = uniform01(rng);
      const auto est = weighted_mle(f, data, w);
      const double best = weighted_loglik(est, data, w);
      double grid_best = -1e300;
      for (int i = 0; i < 100; ++i) {
        for (int j = 0; j < 100; ++j) {
          const double mu = period_of(f) * i / 100.0;
          const double k = is_von_mises(f) ? 20.0 * j / 99.0 : 0.99 * j / 99.0;
          grid_best = std::max(grid_best, weighted_loglik(MarginalSpec::make(f, mu, k), data, w));
        }
      }
      EXPECT_GE(best - grid_best, -1e-6) << to_string(f);
    }
  }
}

TEST(WeightedMle, AxialVonMisesWarmStartAgreesWithMultistart) {
  const auto data = draw(MarginalSpec::make(Family::VMax, 2.0, 5.0), 600, 41);
  const std::vector<double> w(data.size(), 1.0);
  const auto cold = weighted_mle(Family::VMax, data, w);
  const auto warm = weighted_mle(Family::VMax, data, w, MarginalSpec::make(Family::VMax, 1.5, 1.0));
  EXPECT_NEAR(cold.mu, warm.mu, 1e-7);
  EXPECT_NEAR(cold.kappa, warm.kappa, 1e-6);
}

}  // namespace
}  // namespace circmix
