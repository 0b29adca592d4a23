#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "csflock/clustering.hpp"
#include "csflock/errors.hpp"
#include "csflock/model.hpp"
#include "oracles.hpp"

using namespace csflock;

namespace {

const Potential kBeta2(2.0);

double momentum(const ClusterPartition& p) {
  double s = 0.0;
  const auto sizes = p.sizes();
  for (std::size_t i = 0; i < p.count; ++i) s += static_cast<double>(sizes[i]) * p.group_velocities[i];
  return s;
}

// Second-order cut condition written from the natural velocities directly.
std::size_t second_order_count_oracle(const std::vector<double>& x, const std::vector<double>& v,
                                      double kappa, double beta) {
  const std::size_t n = x.size();
  std::vector<double> nu(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k != i) s += oracle::unit_potential(beta, x[k] - x[i]);
    }
    nu[i] = v[i] - kappa * s / n;
  }
  const auto parts = oracle::maximal_partitions(nu, kappa, 1.0 / (beta - 1.0));
  return parts.size() == 1 ? parts[0].size() - 1 : 0;
}

}  // namespace

TEST(Clustering, FirstOrderExamples) {
  const auto mono = predict_first_order(std::vector<double>{-1, 1}, 3.0, kBeta2);
  EXPECT_EQ(mono.count, 1u);
  EXPECT_EQ(mono.boundaries, (std::vector<std::size_t>{0, 2}));
  EXPECT_NEAR(mono.group_velocities[0], 0.0, 1e-15);

  const auto two = predict_first_order(std::vector<double>{-1, 1}, 1.0, kBeta2);
  EXPECT_EQ(two.count, 2u);
  EXPECT_NEAR(two.group_velocities[0], -0.5, 1e-15);
  EXPECT_NEAR(two.group_velocities[1], 0.5, 1e-15);

  const auto flat = predict_first_order(std::vector<double>(5, 0.0), 1e-6, kBeta2);
  EXPECT_EQ(flat.count, 1u);
}

TEST(Clustering, KappaCriticalExamples) {
  EXPECT_NEAR(kappa_critical_first_order(std::vector<double>{-1, 1}, kBeta2), 2.0, 1e-15);
  EXPECT_EQ(kappa_critical_first_order(std::vector<double>{1, -1}, kBeta2), 0.0);
  EXPECT_NEAR(kappa_critical_first_order(std::vector<double>{-1, 0, 1}, kBeta2), 1.5, 1e-15);
}

TEST(Clustering, ExactThresholdIsMultiCluster) {
  const auto p = predict_first_order(std::vector<double>{-1, 1}, 2.0, kBeta2);
  EXPECT_EQ(p.count, 2u);
  EXPECT_TRUE(p.degenerate);
  EXPECT_FALSE(p.warnings.empty());
  EXPECT_EQ(p.min_margin, 0.0);
}

TEST(Clustering, RegimeErrors) {
  EXPECT_THROW(predict_first_order(std::vector<double>{-1, 1}, 1.0, Potential(1.0)), RegimeError);
  EXPECT_THROW(predict_first_order(std::vector<double>{-1, 1}, 1.0, Potential(0.5)), RegimeError);
  EXPECT_THROW(kappa_critical_first_order(std::vector<double>{-1, 1}, Potential(0.5)), RegimeError);
  const auto trivial = predict_unconditional(std::vector<double>{-1, 3});
  EXPECT_EQ(trivial.count, 1u);
  EXPECT_DOUBLE_EQ(trivial.group_velocities[0], 1.0);
}

TEST(Clustering, SecondOrderExamples) {
  const std::vector<double> x{-1, 1};
  EXPECT_EQ(predict_second_order(x, std::vector<double>{1, -1}, 1e-3, kBeta2).count, 1u);
  EXPECT_EQ(predict_second_order(x, std::vector<double>{1, -1}, 50.0, kBeta2).count, 1u);
  EXPECT_EQ(predict_second_order(x, std::vector<double>{-1, 1}, 8.0, kBeta2).count, 1u);
  EXPECT_EQ(predict_second_order(x, std::vector<double>{-1, 1}, 2.0, kBeta2).count, 2u);
  EXPECT_NEAR(kappa_critical_second_order(x, std::vector<double>{-1, 1}, kBeta2), 4.0, 1e-14);
  EXPECT_EQ(kappa_critical_second_order(x, std::vector<double>{1, -1}, kBeta2), 0.0);
  EXPECT_THROW(predict_second_order(std::vector<double>{1, -1}, std::vector<double>{0, 0}, 1.0, kBeta2),
               DomainError);
  EXPECT_THROW(predict_second_order(std::vector<double>{0, 0}, std::vector<double>{1, -1}, 1.0, kBeta2),
               DomainError);
}

TEST(Clustering, SmallKappaExamples) {
  EXPECT_EQ(predict_small_kappa(std::vector<double>{-1, 1}).count, 2u);
  EXPECT_EQ(predict_small_kappa(std::vector<double>{1, -1}).count, 1u);
  EXPECT_TRUE(predict_small_kappa(std::vector<double>{1, -1}).group_velocities.empty());
  std::mt19937_64 rng(2);
  for (std::size_t n = 2; n < 12; ++n) {
    auto v = oracle::normals(rng, n);
    std::sort(v.rbegin(), v.rend());
    EXPECT_EQ(predict_small_kappa(v).count, 1u);
  }
}

TEST(Clustering, LocalStatsFluctuationsSumToZero) {
  std::mt19937_64 rng(9);
  const auto nu = oracle::normals(rng, 8, false);
  const auto x = oracle::normals(rng, 8, false, true);
  const auto s = local_stats(nu, x, 2, 7);
  EXPECT_EQ(s.fluct_nu.size(), 5u);
  EXPECT_NEAR(std::accumulate(s.fluct_nu.begin(), s.fluct_nu.end(), 0.0), 0.0, 1e-14);
  EXPECT_NEAR(std::accumulate(s.fluct_x.begin(), s.fluct_x.end(), 0.0), 0.0, 1e-14);
  EXPECT_NEAR(s.mean_nu, oracle::mean(nu, 2, 7), 1e-15);
  EXPECT_THROW(local_stats(nu, x, 3, 3), ConfigError);
}

TEST(Clustering, PropertyPartitionValidity) {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> kd(-3.0, 1.5);
  std::uniform_int_distribution<std::size_t> nd(2, 12);
  std::uniform_real_distribution<double> bd(1.1, 4.0);
  for (int trial = 0; trial < 10000; ++trial) {
    const auto nu = oracle::normals(rng, nd(rng));
    const double kappa = std::pow(10.0, kd(rng));
    const Potential pot(bd(rng));
    const auto p = predict_first_order(nu, kappa, pot);
    ASSERT_NO_THROW(p.validate(nu.size()));
    ASSERT_EQ(p.group_velocities.size(), p.count);
    EXPECT_NEAR(momentum(p), 0.0, 1e-12 * (1 + kappa));
    for (std::size_t i = 0; i + 1 < p.count; ++i) {
      EXPECT_LT(p.group_velocities[i], p.group_velocities[i + 1]);
    }
  }
}

TEST(Clustering, PropertyBruteForceOracle) {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> kd(-2.0, 1.0);
  for (int trial = 0; trial < 3000; ++trial) {
    const std::size_t n = 2 + trial % 5;
    const auto nu = oracle::normals(rng, n);
    const double kappa = std::pow(10.0, kd(rng));
    const auto found = oracle::maximal_partitions(nu, kappa, 1.0);
    ASSERT_EQ(found.size(), 1u);
    const auto p = predict_first_order(nu, kappa, kBeta2);
    EXPECT_EQ(p.boundaries, found[0]);
    const auto want = oracle::limit_group_velocities(nu, kappa, 1.0, found[0]);
    for (std::size_t i = 0; i < p.count; ++i) EXPECT_NEAR(p.group_velocities[i], want[i], 1e-12);
  }
}

TEST(Clustering, PropertyThresholdConsistency) {
  std::mt19937_64 rng(303);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto nu = oracle::normals(rng, 2 + trial % 9);
    const Potential pot(1.5 + (trial % 3));
    const double kc = kappa_critical_first_order(nu, pot);
    if (kc == 0.0) {
      EXPECT_EQ(predict_first_order(nu, 1e-9, pot).count, 1u);
      continue;
    }
    EXPECT_EQ(predict_first_order(nu, kc * (1 + 1e-6), pot).count, 1u);
    EXPECT_GE(predict_first_order(nu, kc * (1 - 1e-6), pot).count, 2u);
  }
}

TEST(Clustering, KappaCriticalMatchesBisection) {
  std::mt19937_64 rng(404);
  for (int trial = 0; trial < 200; ++trial) {
    const auto nu = oracle::normals(rng, 2 + trial % 7);
    const double kc = kappa_critical_first_order(nu, kBeta2);
    if (kc == 0.0) continue;
    auto mono = [&](double k) { return oracle::maximal_partitions(nu, k, 1.0)[0].size() == 2 ? 1.0 : -1.0; };
    const double b = oracle::bisect(mono, 1e-6, 100.0);
    EXPECT_NEAR(b, kc, 1e-9 * kc);
  }
}

TEST(Clustering, SecondOrderKappaCriticalMatchesBisection) {
  std::mt19937_64 rng(505);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + trial % 6;
    const auto x = oracle::normals(rng, n, true, true);
    const auto v = oracle::normals(rng, n);
    const double kc = kappa_critical_second_order(x, v, kBeta2);
    if (kc == 0.0) {
      EXPECT_EQ(predict_second_order(x, v, 1e-6, kBeta2).count, 1u);
      continue;
    }
    auto mono = [&](double k) { return predict_second_order(x, v, k, kBeta2).count == 1 ? 1.0 : -1.0; };
    const double b = oracle::bisect(mono, 1e-9, 1e4);
    EXPECT_NEAR(b, kc, 1e-9 * kc);
    EXPECT_EQ(second_order_count_oracle(x, v, kc * 1.001, 2.0), 1u);
    ++checked;
  }
  EXPECT_GT(checked, 20);
}

TEST(Clustering, SecondOrderIsFirstOrderOfNaturalVelocities) {
  std::mt19937_64 rng(606);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + trial % 8;
    const auto x = oracle::normals(rng, n, true, true);
    const auto v = oracle::normals(rng, n);
    const double kappa = 0.1 + trial % 5;
    const auto nu = natural_velocities(ModelParams(n, kappa, kBeta2), x, v);
    const auto a = predict_second_order(x, v, kappa, kBeta2);
    const auto b = predict_first_order(nu, kappa, kBeta2);
    EXPECT_EQ(a.boundaries, b.boundaries);
    for (std::size_t i = 0; i < a.count; ++i) EXPECT_NEAR(a.group_velocities[i], b.group_velocities[i], 1e-15);
    EXPECT_EQ(a.count, second_order_count_oracle(x, v, kappa, 2.0));
  }
}

TEST(Clustering, SmallKappaAgreement) {
  std::mt19937_64 rng(707);
  int compared = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + trial % 8;
    const auto x = oracle::normals(rng, n, true, true);
    const auto v = oracle::normals(rng, n);
    const auto small = predict_small_kappa(v);
    if (small.degenerate || small.min_margin < 1e-6) continue;
    EXPECT_EQ(predict_second_order(x, v, 1e-8, kBeta2).boundaries, small.boundaries);
    ++compared;
  }
  EXPECT_GT(compared, 90);
}

TEST(Clustering, SweepExamples) {
  SweepInput in{ModelOrder::First, {}, {-1, 1}};
  const std::vector<double> grid{1, 2, 3};
  for (unsigned jobs : {1u, 3u}) {
    const auto rows = sweep_cluster_count(in, grid, kBeta2, jobs);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0].n_clusters, 2u);
    EXPECT_EQ(rows[1].n_clusters, 2u);
    EXPECT_EQ(rows[2].n_clusters, 1u);
    EXPECT_EQ(rows[2].kappa, 3.0);
  }
  std::mt19937_64 rng(808);
  const auto x = oracle::normals(rng, 6, true, true);
  const auto v = oracle::normals(rng, 6);
  SweepInput second{ModelOrder::Second, x, v};
  const std::vector<double> tiny{1e-9};
  EXPECT_EQ(sweep_cluster_count(second, tiny, kBeta2)[0].n_clusters, predict_small_kappa(v).count);
  const std::vector<double> huge{1e6};
  EXPECT_EQ(sweep_cluster_count(second, huge, kBeta2)[0].n_clusters, 1u);
  const std::vector<double> bad{0.0};
  EXPECT_THROW(sweep_cluster_count(in, bad, kBeta2), ConfigError);
}

TEST(Clustering, SweepParallelMatchesSerial) {
  std::mt19937_64 rng(909);
  const auto nu = oracle::normals(rng, 10);
  std::vector<double> grid;
  for (int i = 1; i <= 64; ++i) grid.push_back(0.05 * i);
  SweepInput in{ModelOrder::First, {}, nu};
  const auto a = sweep_cluster_count(in, grid, kBeta2, 1);
  const auto b = sweep_cluster_count(in, grid, kBeta2, 8);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_EQ(a[i].n_clusters, b[i].n_clusters);
}
