#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pqos/correlation.hpp"
#include "pqos/errors.hpp"
#include "pqos/radio_sim.hpp"

namespace pqos::correlation {
namespace {

TimeSeries make_series(const std::vector<double>& values, double t0 = 0.0) {
  TimeSeries s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    s.t_s.push_back(t0 + static_cast<double>(i));
    s.values.push_back(values[i]);
  }
  return s;
}

std::vector<double> random_walk(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> step(0.0, 1.0);
  std::vector<double> v(n);
  double x = 0.0;
  for (auto& e : v) {
    x = 0.9 * x + step(rng);
    e = x;
  }
  return v;
}

// Two-pass Pearson on explicit pairs.
double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

TEST(CrossCorrelation, SelfCorrelationAtZeroIsOne) {
  const auto s = make_series(random_walk(500, 1));
  const auto c = cross_correlation(s, s, 20);
  ASSERT_EQ(c.lags_s.size(), 41u);
  EXPECT_DOUBLE_EQ(c.lags_s[20], 0.0);
  ASSERT_TRUE(c.r[20].has_value());
  EXPECT_EQ(*c.r[20], 1.0);
  EXPECT_EQ(c.n_per_lag[20], 500u);
  EXPECT_DOUBLE_EQ(peak_lag(c), 0.0);
}

TEST(CrossCorrelation, ShiftedCopyPeaksAtShift) {
  const auto base = random_walk(1200, 2);
  const auto a = make_series(base, 0.0);
  const auto b = make_series(base, 120.0);
  const auto c = cross_correlation(a, b, 200);
  EXPECT_DOUBLE_EQ(peak_lag(c), 120.0);
  const auto back = cross_correlation(b, a, 200);
  EXPECT_DOUBLE_EQ(peak_lag(back), -120.0);
}

TEST(CrossCorrelation, MatchesExplicitPairOracle) {
  const auto va = random_walk(300, 3);
  const auto vb = random_walk(280, 4);
  const auto a = make_series(va, 5.0);
  const auto b = make_series(vb, 17.0);
  const auto c = cross_correlation(a, b, 40);
  for (std::size_t k = 0; k < c.lags_s.size(); ++k) {
    const int lag = static_cast<int>(c.lags_s[k]);
    std::vector<double> x, y;
    for (int t = 5; t < 305; ++t) {
      const int tb = t + lag;
      if (tb >= 17 && tb < 297) {
        x.push_back(va[static_cast<std::size_t>(t - 5)]);
        y.push_back(vb[static_cast<std::size_t>(tb - 17)]);
      }
    }
    EXPECT_EQ(c.n_per_lag[k], x.size());
    ASSERT_TRUE(c.r[k].has_value());
    EXPECT_NEAR(*c.r[k], pearson(x, y), 1e-9);
  }
}

TEST(CrossCorrelation, WhiteNoiseIsUncorrelated) {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> x(10000), y(10000);
  for (auto& e : x) e = n(rng);
  for (auto& e : y) e = n(rng);
  const auto c = cross_correlation(make_series(x), make_series(y), 50);
  for (const auto& r : c.r) {
    ASSERT_TRUE(r.has_value());
    EXPECT_LT(std::abs(*r), 0.05);
  }
}

TEST(CrossCorrelation, SymmetricUnderSwap) {
  const auto a = make_series(random_walk(400, 5));
  const auto b = make_series(random_walk(400, 6), 3.0);
  const auto ab = cross_correlation(a, b, 30);
  const auto ba = cross_correlation(b, a, 30);
  const std::size_t n = ab.lags_s.size();
  for (std::size_t k = 0; k < n; ++k) {
    EXPECT_EQ(ab.n_per_lag[k], ba.n_per_lag[n - 1 - k]);
    EXPECT_NEAR(*ab.r[k], *ba.r[n - 1 - k], 1e-12);
  }
}

TEST(CrossCorrelation, InvariantUnderPositiveAffineMaps) {
  const auto va = random_walk(400, 7);
  const auto a = make_series(va);
  auto scaled = a;
  auto flipped = a;
  for (auto& v : scaled.values) v = 3.5 * v - 40.0;
  for (auto& v : flipped.values) v = -2.0 * v + 1.0;
  const auto b = make_series(random_walk(400, 8));
  const auto c0 = cross_correlation(a, b, 25);
  const auto c1 = cross_correlation(scaled, b, 25);
  const auto c2 = cross_correlation(flipped, b, 25);
  for (std::size_t k = 0; k < c0.r.size(); ++k) {
    EXPECT_NEAR(*c0.r[k], *c1.r[k], 1e-9);
    EXPECT_NEAR(*c0.r[k], -*c2.r[k], 1e-9);
  }
}

TEST(CrossCorrelation, ValuesStayInUnitInterval) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const auto a = make_series(random_walk(200, static_cast<unsigned>(rng())));
    const auto b = make_series(random_walk(200, static_cast<unsigned>(rng())));
    for (const auto& r : cross_correlation(a, b, 60).r) {
      if (r) {
        EXPECT_GE(*r, -1.0);
        EXPECT_LE(*r, 1.0);
      }
    }
  }
}

TEST(CrossCorrelation, UndefinedWithFewPairsOrZeroVariance) {
  const auto a = make_series(random_walk(40, 9));
  const auto c = cross_correlation(a, a, 20);
  for (std::size_t k = 0; k < c.lags_s.size(); ++k) {
    EXPECT_EQ(c.r[k].has_value(), c.n_per_lag[k] >= kMinOverlap) << c.lags_s[k];
  }
  const auto flat = make_series(std::vector<double>(100, 4.0));
  const auto cf = cross_correlation(flat, a, 5);
  for (const auto& r : cf.r) EXPECT_FALSE(r.has_value());
  EXPECT_THROW(peak_lag(cf), DomainError);
}

TEST(PeakLag, TiesGoToSmallestMagnitudeThenNegative) {
  CorrelationCurve c;
  c.lags_s = {-2, -1, 0, 1, 2};
  c.r = {0.9, 0.5, 0.1, 0.5, 0.9};
  c.n_per_lag = {50, 50, 50, 50, 50};
  EXPECT_DOUBLE_EQ(peak_lag(c), -2.0);
  c.r = {0.1, 0.7, std::nullopt, 0.7, 0.2};
  EXPECT_DOUBLE_EQ(peak_lag(c), -1.0);
  c.r = {0.1, 0.2, 0.3, 0.3, 0.1};
  EXPECT_DOUBLE_EQ(peak_lag(c), 0.0);
}

TEST(PeakLag, NegativeShiftIsFound) {
  const auto base = random_walk(600, 12);
  const auto a = make_series(base, 30.0);
  const auto b = make_series(base, 0.0);
  EXPECT_DOUBLE_EQ(peak_lag(cross_correlation(a, b, 60)), -30.0);
}

TEST(Kpi, NamesRoundTrip) {
  for (Kpi k : {Kpi::kRsrp, Kpi::kRsrq, Kpi::kRssi, Kpi::kSnr, Kpi::kThroughput}) {
    EXPECT_EQ(parse_kpi(kpi_name(k)), k);
  }
  EXPECT_THROW(parse_kpi("latency"), Error);
}

radio::CampaignConfig single_round(std::uint64_t seed, int vehicles) {
  radio::CampaignConfig c;
  c.n_rounds = 1;
  c.n_vehicles = vehicles;
  c.seed = seed;
  return c;
}

TEST(SimulatedTraces, SnrPeakMatchesStartGap) {
  radio::EnvironmentConfig env;
  const auto traces = radio::simulate_campaign(env, single_round(1, 2));
  const auto leader = extract(traces[0], Kpi::kSnr);
  const auto follower = extract(traces[1], Kpi::kSnr);
  const double lag = peak_lag(cross_correlation(leader, follower, 300));
  EXPECT_NEAR(lag, 180.0, 10.0);
}

TEST(SimulatedTraces, EveryPairPeaksNearItsGap) {
  radio::EnvironmentConfig env;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto traces = radio::simulate_campaign(env, single_round(seed, 4));
    for (std::size_t i = 0; i < traces.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        const double expected = 180.0 * static_cast<double>(i - j);
        const auto c = cross_correlation(extract(traces[j], Kpi::kRsrp), extract(traces[i], Kpi::kRsrp), 700);
        EXPECT_NEAR(peak_lag(c), expected, 0.1 * expected) << "seed " << seed << " pair " << i << "," << j;
      }
    }
  }
}

}  // namespace
}  // namespace pqos::correlation
