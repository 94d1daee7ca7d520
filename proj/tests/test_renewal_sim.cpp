#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "raring/distribution.hpp"
#include "raring/renewal.hpp"
#include "raring/step_cdf.hpp"

using namespace raring;

TEST(SamplePath, DeterministicProgression) {
  const auto p = sample_path(DistributionSpec::deterministic(1.0), 3.5, Rng(1));
  const std::vector<double> want = {0, 1, 2, 3, 4};
  ASSERT_EQ(p.partials().size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i)
    EXPECT_DOUBLE_EQ(p.partials()[i], want[i]);
  EXPECT_EQ(p.arrivals(), 4u);
}

TEST(SamplePath, StopsOnceHorizonReached) {
  const auto p = sample_path(DistributionSpec::deterministic(2.0), 2.0, Rng(1));
  ASSERT_EQ(p.partials().size(), 2u);
  EXPECT_EQ(p.partials()[1], 2.0);
}

TEST(SamplePath, ExponentialCountNearHorizon) {
  const double horizon = 1e4;
  const auto p = sample_path(DistributionSpec::exponential(1.0), horizon, Rng(77));
  const auto n = static_cast<double>(count_at(p, horizon));
  EXPECT_NEAR(n, horizon, 300.0);
}

TEST(SamplePath, CoversHorizonAndIsStrictlyIncreasing) {
  Rng seeds(3);
  for (int r = 0; r < 50; ++r) {
    const auto p = sample_path(DistributionSpec::uniform(0.1, 0.9), 20.0,
                               Rng(seeds.next_u64()));
    const auto tau = p.partials();
    EXPECT_EQ(tau[0], 0.0);
    EXPECT_GE(p.last(), 20.0);
    for (std::size_t i = 1; i < tau.size(); ++i) EXPECT_GT(tau[i], tau[i - 1]);
  }
}

TEST(SamplePath, DeterministicGivenSeed) {
  const auto spec = DistributionSpec::exponential(2.0);
  const auto a = sample_path(spec, 50.0, Rng(9));
  const auto b = sample_path(spec, 50.0, Rng(9));
  ASSERT_EQ(a.partials().size(), b.partials().size());
  for (std::size_t i = 0; i < a.partials().size(); ++i)
    EXPECT_EQ(a.partials()[i], b.partials()[i]);
}

TEST(SamplePath, GuardsPathologicalSpecs) {
  EXPECT_THROW(sample_path(DistributionSpec::deterministic(1e-9), 1e3, Rng(1)),
               std::length_error);
  EXPECT_THROW(sample_path(DistributionSpec::exponential(1.0), 0.0, Rng(1)),
               std::invalid_argument);
}

TEST(CountAt, Examples) {
  const auto p = sample_path(DistributionSpec::deterministic(1.0), 5.0, Rng(1));
  EXPECT_EQ(count_at(p, 2.5), 2u);
  EXPECT_EQ(count_at(p, 0.0), 0u);
  EXPECT_EQ(count_at(p, 2.0), 1u);  // strict inequality tau_n < t
  EXPECT_THROW(count_at(p, 5.5), std::out_of_range);
}

TEST(CountAt, MonotoneAndPassesEachPoint) {
  const auto p = sample_path(DistributionSpec::exponential(1.0), 100.0, Rng(4));
  std::size_t prev = 0;
  for (double t = 0.0; t <= 100.0; t += 0.05) {
    const auto n = count_at(p, t);
    EXPECT_GE(n, prev);
    prev = n;
  }
  const auto tau = p.partials();
  for (std::size_t n = 1; n < tau.size() && tau[n] + 1e-9 <= 100.0; ++n) {
    EXPECT_GE(count_at(p, tau[n] + 1e-9), n);
  }
}

TEST(CountAt, ElementaryRenewalRate) {
  const double mu = 1.5;
  const double t = 1e3;
  Rng seeds(11);
  double sum = 0.0;
  for (int r = 0; r < 1000; ++r) {
    const auto p = sample_path(DistributionSpec::exponential(mu), t,
                               Rng(seeds.next_u64()));
    sum += static_cast<double>(count_at(p, t)) / t;
  }
  EXPECT_NEAR(sum / 1000.0, mu, 0.02 * mu);
}

TEST(Overshoot, Examples) {
  auto p = sample_path(DistributionSpec::deterministic(1.0), 5.0, Rng(1));
  EXPECT_DOUBLE_EQ(overshoot(p, 0.25), 0.75);
  EXPECT_DOUBLE_EQ(overshoot(p, 2.0), 1.0);  // next point strictly past t
  EXPECT_DOUBLE_EQ(overshoot(p, 0.0), 1.0);
}

TEST(Overshoot, LandsOnRenewalPointAndExtends) {
  auto p = sample_path(DistributionSpec::exponential(1.0), 10.0, Rng(21));
  for (double t : {0.0, 3.3, 9.99, 10.0}) {
    const double g = overshoot(p, t);
    EXPECT_GT(g, 0.0);
    const auto tau = p.partials();
    bool found = false;
    for (double x : tau) found = found || x == t + g;
    EXPECT_TRUE(found) << "t=" << t;
  }
  const double before = p.last();
  const double g = overshoot(p, before);
  EXPECT_GT(g, 0.0);
  EXPECT_GT(p.last(), before);
}

TEST(Overshoot, MemorylessLaw) {
  Rng seeds(31);
  const auto e = DistributionSpec::exponential(1.0);
  std::vector<double> values(100'000);
  for (double& v : values) {
    auto p = sample_path(e, 100.0, Rng(seeds.next_u64()));
    v = overshoot(p, 100.0);
  }
  const auto r = ks_distance(EmpiricalCDF(values), discretize(e, 1e-3, 30.0));
  EXPECT_LE(r.distance, 0.01);
}

TEST(PartialSum, Examples) {
  const auto p = sample_path(DistributionSpec::deterministic(2.0), 10.0, Rng(1));
  EXPECT_EQ(partial_sum(p, 0), 0.0);
  EXPECT_DOUBLE_EQ(partial_sum(p, 3), 6.0);
  EXPECT_THROW(partial_sum(p, p.arrivals() + 1), std::out_of_range);
}

TEST(PartialSum, LawOfLargeNumbers) {
  const std::size_t i = 100'000;
  const auto p = sample_path(DistributionSpec::exponential(1.0),
                             static_cast<double>(i) * 1.05, Rng(5));
  ASSERT_GE(p.arrivals(), i);
  EXPECT_NEAR(partial_sum(p, i) / static_cast<double>(i), 1.0, 0.01);
}

TEST(RenewalPath, ExplicitTimes) {
  const std::vector<double> t = {1.0, 2.5, 4.0};
  auto p = RenewalPath::from_times(t, 3.0);
  EXPECT_EQ(p.arrivals(), 3u);
  EXPECT_EQ(count_at(p, 2.5), 1u);
  EXPECT_DOUBLE_EQ(overshoot(p, 2.5), 1.5);
  EXPECT_THROW(overshoot(p, 4.0), std::out_of_range);
  const std::vector<double> bad = {1.0, 1.0};
  EXPECT_THROW(RenewalPath::from_times(bad, 1.0), std::invalid_argument);
  EXPECT_THROW(RenewalPath::from_times(t, 5.0), std::invalid_argument);
}

TEST(RenewalPath, ExtensionContinuesTheSameStream) {
  const auto spec = DistributionSpec::exponential(1.0);
  auto grown = sample_path(spec, 5.0, Rng(8));
  grown.extend_to(50.0);
  const auto direct = sample_path(spec, 50.0, Rng(8));
  ASSERT_GE(grown.partials().size(), direct.partials().size());
  for (std::size_t i = 0; i < direct.partials().size(); ++i)
    EXPECT_EQ(grown.partials()[i], direct.partials()[i]);
}

TEST(RenewalPath, WriteCsv) {
  const auto p = sample_path(DistributionSpec::deterministic(1.0), 2.0, Rng(1));
  std::ostringstream os;
  write_csv(os, p);
  EXPECT_EQ(os.str(), "i,eta,tau\n0,0,0\n1,1,1\n2,1,2\n");
}
