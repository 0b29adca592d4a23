#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "csflock/errors.hpp"
#include "csflock/potential.hpp"
#include "oracles.hpp"

using namespace csflock;

TEST(Potential, RegimeClassification) {
  EXPECT_EQ(Potential(0.5).regime(), Regime::LongRange);
  EXPECT_EQ(Potential(1.0).regime(), Regime::Critical);
  EXPECT_EQ(Potential(std::nextafter(1.0, 2.0)).regime(), Regime::ShortRange);
  EXPECT_EQ(Potential(std::nextafter(1.0, 0.0)).regime(), Regime::LongRange);
  EXPECT_THROW(Potential(0.0), DomainError);
  EXPECT_THROW(Potential(-1.0), DomainError);
  EXPECT_THROW(Potential(std::nan("")), DomainError);
}

TEST(Potential, WeightValues) {
  EXPECT_DOUBLE_EQ(Potential(2.0).weight(2.0), 0.25);
  EXPECT_DOUBLE_EQ(Potential(0.5).weight(-4.0), 0.5);
  EXPECT_THROW(Potential(0.5).weight(0.0), DomainError);
}

TEST(Potential, OriginPotentialKnownValues) {
  const Potential p(0.5);
  // [DERIVED] 2 sqrt(x) by direct integration of x^-1/2.
  EXPECT_NEAR(p.origin_potential(1.0), 2.0, 1e-15);
  EXPECT_NEAR(p.origin_potential(4.0), 4.0, 1e-14);
  EXPECT_NEAR(p.origin_potential(-4.0), -4.0, 1e-14);
  EXPECT_EQ(p.origin_potential(0.0), 0.0);
  EXPECT_NEAR(p.origin_potential_inverse(2.0), 1.0, 1e-15);
  EXPECT_THROW(p.origin_potential_inverse(-1.0), RangeError);
  EXPECT_THROW(Potential(2.0).origin_potential(1.0), RegimeError);
}

TEST(Potential, UnitPotentialKnownValues) {
  const Potential p2(2.0);
  // [DERIVED] 1 - 1/x for beta = 2.
  EXPECT_DOUBLE_EQ(p2.unit_potential(1.0), 0.0);
  EXPECT_NEAR(p2.unit_potential(2.0), 0.5, 1e-15);
  EXPECT_NEAR(p2.unit_potential(-2.0), -0.5, 1e-15);
  EXPECT_DOUBLE_EQ(p2.unit_potential_limit(), 1.0);
  EXPECT_NEAR(p2.unit_potential_inverse(-2.0), 1.0 / 3.0, 1e-15);
  EXPECT_THROW(p2.unit_potential_inverse(1.0), RangeError);
  EXPECT_THROW(p2.unit_potential(0.0), DomainError);

  const Potential p1(1.0);
  EXPECT_NEAR(p1.unit_potential(std::exp(1.0)), 1.0, 1e-15);
  EXPECT_NEAR(p1.unit_potential_inverse(-2.0), std::exp(-2.0), 1e-16);
  EXPECT_THROW(p1.unit_potential_limit(), RegimeError);
  EXPECT_THROW(Potential(0.5).unit_potential(1.0), RegimeError);
}

TEST(Potential, MatchesQuadratureOracle) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> beta_lr(0.05, 0.95), beta_sr(1.05, 4.0), xs(1e-3, 20.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double x = xs(rng) * (trial % 2 ? 1.0 : -1.0);
    const double bl = beta_lr(rng);
    const double bs = beta_sr(rng);
    const Potential lr(bl), sr(bs), cr(1.0);
    EXPECT_NEAR(lr.origin_potential(x), oracle::origin_potential(bl, x),
                1e-9 * (1.0 + std::fabs(lr.origin_potential(x))))
        << "beta=" << bl << " x=" << x;
    EXPECT_NEAR(sr.unit_potential(x), oracle::unit_potential(bs, x), 1e-10) << "beta=" << bs << " x=" << x;
    EXPECT_NEAR(cr.unit_potential(x), oracle::unit_potential(1.0, x), 1e-10) << "x=" << x;
  }
}

TEST(Potential, DerivativeIsWeight) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> xs(0.05, 10.0);
  for (double beta : {0.3, 0.5, 0.9, 1.0, 1.5, 2.0, 3.0}) {
    const Potential p(beta);
    for (int trial = 0; trial < 50; ++trial) {
      const double x = xs(rng);
      const double h = 1e-5 * x;
      const double fd = (p.interaction(x + h) - p.interaction(x - h)) / (2 * h);
      EXPECT_NEAR(fd, p.weight(x), 1e-7 * p.weight(x)) << "beta=" << beta << " x=" << x;
    }
  }
}

TEST(Potential, PropertyOddAndInvertible) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> betas(0.1, 4.0), xs(1e-4, 50.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const double beta = betas(rng);
    const Potential p(beta);
    const double x = xs(rng);
    EXPECT_EQ(p.interaction(-x), -p.interaction(x));
    const double c = p.interaction(x);
    if (p.regime() == Regime::LongRange) {
      EXPECT_NEAR(p.interaction_inverse(c), x, 1e-11 * x);
    } else if (c < 30.0) {
      EXPECT_NEAR(p.interaction_inverse(c), x, 1e-9 * x) << "beta=" << beta;
    }
  }
}

TEST(Potential, ShortRangeBoundedByLimit) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> betas(1.01, 3.0), xs(1e-3, 100.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const Potential p(betas(rng));
    EXPECT_LT(p.unit_potential(xs(rng)), p.unit_potential_limit());
  }
}

TEST(Potential, RegimeNames) {
  EXPECT_EQ(to_string(Regime::LongRange), "long-range");
  EXPECT_EQ(to_string(Regime::Critical), "critical");
  EXPECT_EQ(to_string(Regime::ShortRange), "short-range");
}
