#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <vector>

#include "raring/mutual.hpp"

using namespace raring;

namespace {

RenewalPath times(std::vector<double> t, double horizon) {
  return RenewalPath::from_times(t, horizon);
}

std::vector<double> arithmetic(double first, double step, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(first + step * i);
  return v;
}

MarkingRecord random_record(std::uint64_t seed, double horizon,
                            const DistributionSpec& h,
                            const DistributionSpec& z) {
  return mark(sample_path(h, horizon, Rng(derive_seed(seed, 1))),
              sample_path(z, horizon, Rng(derive_seed(seed, 2))));
}

}  // namespace

TEST(Mark, DenseMarking) {
  const auto rec = mark(times(arithmetic(1, 1, 20), 20.0),
                        times(arithmetic(0.5, 1, 21), 20.0));
  ASSERT_EQ(rec.chi.size(), 20u);
  for (auto c : rec.chi) EXPECT_EQ(c, 1);
  ASSERT_EQ(rec.t_doubleprime.size(), 21u);
  for (std::size_t i = 0; i < rec.t_doubleprime.size(); ++i)
    EXPECT_EQ(rec.t_doubleprime[i], static_cast<double>(i));
}

TEST(Mark, SingleMark) {
  const auto rec =
      mark(times(arithmetic(1, 1, 12), 12.0), times({10.5, 30.0}, 12.0));
  for (std::size_t i = 1; i <= rec.chi.size(); ++i)
    EXPECT_EQ(rec.chi[i - 1], i == 11 ? 1 : 0) << "i=" << i;
  EXPECT_EQ(rec.t_doubleprime, (std::vector<double>{0.0, 11.0}));
  EXPECT_EQ(rec.t_prime, (std::vector<double>{10.5}));
}

TEST(Mark, CoincidentPointsCountAsInside) {
  const auto rec = mark(times({1, 2, 3}, 3.0), times({3}, 3.0));
  EXPECT_EQ(rec.chi, (std::vector<std::uint8_t>{0, 0, 1}));
  EXPECT_EQ(rec.t_prime, (std::vector<double>{3.0}));
  EXPECT_EQ(rec.t_doubleprime, (std::vector<double>{0.0, 3.0}));
}

TEST(Mark, HorizonMismatchRejected) {
  EXPECT_THROW(mark(times({1, 2}, 2.0), times({3}, 3.0)),
               std::invalid_argument);
}

TEST(Mark, PoissonMarkingFraction) {
  const auto rec = random_record(4, 1e4, DistributionSpec::exponential(1.0),
                                 DistributionSpec::exponential(0.1));
  double marked = 0.0;
  for (auto c : rec.chi) marked += c;
  const double lambda = 0.1;
  EXPECT_NEAR(marked / static_cast<double>(rec.chi.size()),
              1.0 - 1.0 / (1.0 + lambda), 0.01);
}

TEST(Mark, InterleavingOnRandomPairs) {
  const std::vector<std::pair<DistributionSpec, DistributionSpec>> laws = {
      {DistributionSpec::exponential(1.0), DistributionSpec::exponential(0.3)},
      {DistributionSpec::uniform(0.5, 1.5), DistributionSpec::exponential(2.0)},
      {DistributionSpec::exponential(0.5), DistributionSpec::uniform(0.1, 3.0)},
  };
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto& [h, z] = laws[seed % laws.size()];
    const auto rec = random_record(seed, 60.0, h, z);
    const auto& tpp = rec.t_doubleprime;
    const auto& tp = rec.t_prime;
    ASSERT_EQ(tpp.front(), 0.0);
    ASSERT_FALSE(tp.empty());
    EXPECT_GT(tp[0], 0.0);
    for (std::size_t n = 1; n < tpp.size(); ++n) {
      ASSERT_LE(n, tp.size());
      EXPECT_LE(tp[n - 1], tpp[n]);
      if (n < tp.size()) EXPECT_LE(tpp[n], tp[n]);
    }
  }
}

TEST(Mark, ChiMatchesIntervalDefinition) {
  const auto rec = random_record(17, 200.0, DistributionSpec::exponential(1.0),
                                 DistributionSpec::exponential(0.7));
  const auto tau = rec.h_path.partials();
  const auto theta = rec.z_path.partials();
  for (std::size_t i = 1; i <= rec.chi.size(); ++i) {
    bool holds = false;
    for (std::size_t n = 1; n < theta.size(); ++n)
      holds = holds || (theta[n] > tau[i - 1] && theta[n] <= tau[i]);
    EXPECT_EQ(rec.chi[i - 1], holds ? 1 : 0) << "i=" << i;
  }
}

TEST(XiOf, Examples) {
  const auto dense = mark(times(arithmetic(1, 1, 10), 10.0),
                          times(arithmetic(0.5, 1, 11), 10.0));
  for (std::int64_t l = 0; l < 9; ++l) EXPECT_EQ(xi_of(dense, l), 1);

  // chi = (0, 0, 1, 0, 1)
  const auto rec =
      mark(times({1, 2, 3, 4, 5}, 5.0), times({2.5, 4.5, 6.0}, 5.0));
  ASSERT_EQ(rec.chi, (std::vector<std::uint8_t>{0, 0, 1, 0, 1}));
  EXPECT_EQ(xi_of(rec, 0), 3);
  EXPECT_EQ(xi_of(rec, 3), 2);
  EXPECT_EQ(xi_of(rec, 4), 1);
  EXPECT_THROW(xi_of(rec, 5), std::out_of_range);
}

TEST(XiOf, ConsistentWithChi) {
  const auto rec = random_record(23, 500.0, DistributionSpec::exponential(1.0),
                                 DistributionSpec::exponential(0.2));
  const auto last_mark = static_cast<std::int64_t>(
      rec.chi.rend() - std::find(rec.chi.rbegin(), rec.chi.rend(), 1));
  for (std::int64_t l = 0; l < last_mark; ++l) {
    const auto xi = xi_of(rec, l);
    EXPECT_EQ(rec.chi[static_cast<std::size_t>(l + xi - 1)], 1);
    for (std::int64_t j = 1; j < xi; ++j)
      EXPECT_EQ(rec.chi[static_cast<std::size_t>(l + j - 1)], 0);
  }
}

TEST(MarkovIncrements, DeterministicInterleave) {
  const auto rec = mark(times(arithmetic(1, 1, 10), 10.0),
                        times(arithmetic(0.5, 1, 11), 10.0));
  const auto inc = markov_increments(rec);
  ASSERT_EQ(inc.v.size(), 10u);
  for (double v : inc.v) EXPECT_DOUBLE_EQ(v, 0.5);
  for (double u : inc.u) EXPECT_DOUBLE_EQ(u, 0.5);
}

TEST(MarkovIncrements, SinglePair) {
  const auto rec = mark(times({1, 2, 3}, 3.0), times({3}, 3.0));
  const auto inc = markov_increments(rec);
  EXPECT_EQ(inc.v, (std::vector<double>{3.0}));
  EXPECT_EQ(inc.u, (std::vector<double>{0.0}));
}

TEST(MarkovIncrements, NoCompletePairRejected) {
  const auto rec = mark(times({1, 2, 3}, 3.0), times({10}, 3.0));
  EXPECT_THROW(markov_increments(rec), std::invalid_argument);
}

TEST(MarkovIncrements, PositivityAndSelfConsistentMean) {
  const auto h = DistributionSpec::exponential(1.0);
  const auto z = DistributionSpec::exponential(0.1);
  const auto stats = [&](std::uint64_t seed) {
    const auto rec = random_record(seed, 1.2e5, h, z);
    const auto inc = markov_increments(rec);
    double s = 0.0, sq = 0.0;
    const std::size_t n = std::min<std::size_t>(inc.v.size(), 10'000);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_GT(inc.v[i], 0.0);
      EXPECT_GE(inc.u[i], 0.0);
      s += inc.v[i];
      sq += inc.v[i] * inc.v[i];
    }
    const double mean = s / n;
    return std::pair{mean, std::sqrt((sq / n - mean * mean) / n)};
  };
  const auto [m1, se1] = stats(100);
  const auto [m2, se2] = stats(200);
  EXPECT_LE(std::abs(m1 - m2), 2.0 * std::hypot(se1, se2));
  // Z is Poisson: the wait from a marked H-point to the next Z-point is
  // exponential with mean 1 / 0.1.
  EXPECT_NEAR(m1, 10.0, 4.0 * se1);
}

TEST(MarkingStream, MatchesBatchMarking) {
  const auto h = DistributionSpec::exponential(1.0);
  const auto z = DistributionSpec::exponential(0.4);
  const std::uint64_t seed = 55;
  MarkingStream stream(h, z, seed);
  const auto rec = mark(sample_path(h, 300.0, MarkingStream::h_stream(seed)),
                        sample_path(z, 300.0, MarkingStream::z_stream(seed)));
  for (std::size_t i = 1; i <= rec.chi.size(); ++i) {
    EXPECT_EQ(stream.chi(i), rec.chi[i - 1] == 1) << "i=" << i;
    EXPECT_EQ(stream.tau(i), rec.h_path.partials()[i]);
  }
}

TEST(SubflowIdentity, MarkedTimesAreTauOfBeta) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto rec = std::make_shared<const MarkingRecord>(
        random_record(seed, 300.0, DistributionSpec::exponential(1.0),
                      DistributionSpec::exponential(0.25)));
    const std::size_t k = rec->t_doubleprime.size() - 1;
    ASSERT_GE(k, 1u);
    const MarkingSource src(rec);
    const auto beta = beta_sequence(src, k, seed);
    const auto tau = rec->h_path.partials();
    for (std::size_t i = 1; i <= k; ++i) {
      EXPECT_EQ(tau[static_cast<std::size_t>(beta(i))], rec->t_doubleprime[i]);
    }
  }
}

TEST(XiCdfFormula, DenseZGivesOne) {
  const auto e = xi_cdf_formula(DistributionSpec::deterministic(1.0),
                                DistributionSpec::deterministic(0.001), 3, 1,
                                2000, 1);
  EXPECT_EQ(e.value, 1.0);
}

TEST(XiCdfFormula, SparseZGivesZero) {
  const auto e = xi_cdf_formula(DistributionSpec::deterministic(1.0),
                                DistributionSpec::deterministic(10.0), 0, 5,
                                2000, 1);
  EXPECT_EQ(e.value, 0.0);
}

TEST(XiCdfFormula, AgreesWithDirectEstimate) {
  const auto h = DistributionSpec::exponential(1.0);
  const auto z = DistributionSpec::exponential(0.1);
  const auto f = xi_cdf_formula(h, z, 0, 10, 10'000, 3);
  const auto d = xi_cdf_direct(h, z, 0, 10, 10'000, 4);
  EXPECT_LE(std::abs(f.value - d.value), 3.0 * std::hypot(f.stderr_, d.stderr_));
  // Poisson Z: each H-interval is marked independently with probability
  // 1 - 1 / (1 + lambda), so xi(0) is geometric.
  const double oracle = 1.0 - std::pow(1.0 / 1.1, 10);
  EXPECT_NEAR(f.value, oracle, 4.0 * f.stderr_);
  EXPECT_NEAR(d.value, oracle, 4.0 * d.stderr_);
}

TEST(PoissonG, EmptySum) {
  const auto e = poisson_G(0.1, DistributionSpec::exponential(1.0), 0.05, 100, 1);
  EXPECT_EQ(e.value, 0.0);
}

TEST(PoissonG, DeterministicTau) {
  const auto e = poisson_G(0.01, DistributionSpec::deterministic(1.0), 1.0, 100, 1);
  EXPECT_NEAR(e.value, 1.0 - std::exp(-1.0), 1e-12);
  EXPECT_NEAR(e.value, 0.632, 1e-3);
}

TEST(PoissonG, ConvergesAlongLadder) {
  const auto h = DistributionSpec::exponential(1.0);
  const double target = 1.0 - std::exp(-1.0);
  double prev_gap = 1.0;
  for (double lambda : {0.1, 0.01, 0.001}) {
    const auto e = poisson_G(lambda, h, 1.0, 10'000, 9);
    // tau_n is Erlang(n, 1): E[exp(-lambda tau_n)] = (1 + lambda)^(-n).
    const double n = std::floor(1.0 / lambda + 1e-9);
    const double oracle = 1.0 - std::pow(1.0 + lambda, -n);
    EXPECT_NEAR(e.value, oracle, 4.0 * e.stderr_ + 1e-12) << lambda;
    const double gap = std::abs(e.value - target);
    EXPECT_LT(gap, prev_gap) << lambda;
    prev_gap = gap;
  }
  EXPECT_LE(prev_gap, 0.02);
}

TEST(MarkedTimes, IncreasingAndReproducible) {
  const auto h = DistributionSpec::exponential(1.0);
  const auto z = DistributionSpec::exponential(0.05);
  const auto a = marked_times(h, z, 5, 77);
  const auto b = marked_times(h, z, 5, 77);
  ASSERT_EQ(a.size(), 5u);
  EXPECT_EQ(a, b);
  for (std::size_t i = 1; i < a.size(); ++i) EXPECT_GT(a[i], a[i - 1]);
}

TEST(MarkingRecord, WriteCsv) {
  const auto rec = mark(times({1, 2}, 2.0), times({1.5, 2.5}, 2.0));
  std::ostringstream os;
  write_csv(os, rec);
  const std::string s = os.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "kind,index,time,marked");
  EXPECT_NE(s.find("H,2,2,1"), std::string::npos);
  EXPECT_NE(s.find("Z,1,1.5,1"), std::string::npos);
}
