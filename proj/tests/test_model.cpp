#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "csflock/errors.hpp"
#include "csflock/model.hpp"
#include "oracles.hpp"

using namespace csflock;

TEST(Model, ParamsValidation) {
  EXPECT_THROW(ModelParams(1, 1.0, Potential(2.0)), ConfigError);
  EXPECT_THROW(ModelParams(3, 0.0, Potential(2.0)), ConfigError);
  EXPECT_THROW(ModelParams(3, -1.0, Potential(2.0)), ConfigError);
  EXPECT_NO_THROW(ModelParams(2, 1e-9, Potential(0.5)));
}

TEST(Model, NormalizeRemovesMeans) {
  const std::vector<double> x{1.0, 2.0, 6.0}, v{0.0, 1.0, 5.0};
  const auto d = normalize(x, v);
  EXPECT_DOUBLE_EQ(d.shift.mean_position, 3.0);
  EXPECT_DOUBLE_EQ(d.shift.mean_velocity, 2.0);
  EXPECT_TRUE(is_zero_mean(d.positions));
  EXPECT_TRUE(is_zero_mean(d.velocities));
  EXPECT_DOUBLE_EQ(d.shift.raw_position(d.positions[0], 2.0), 1.0 + 4.0);
  EXPECT_DOUBLE_EQ(d.shift.raw_velocity(d.velocities[2]), 5.0);
}

TEST(Model, NaturalVelocitiesTwoParticles) {
  // [DERIVED] nu_1 = v_1 - (kappa/2) Phi(2) = -1 - 0.25 for beta = 2.
  const ModelParams p(2, 1.0, Potential(2.0));
  const auto nu = natural_velocities(p, std::vector<double>{-1, 1}, std::vector<double>{-1, 1});
  EXPECT_NEAR(nu[0], -1.25, 1e-15);
  EXPECT_NEAR(nu[1], 1.25, 1e-15);
}

TEST(Model, NaturalVelocityErrors) {
  const ModelParams p(2, 1.0, Potential(2.0));
  EXPECT_THROW(natural_velocities(p, std::vector<double>{0, 0}, std::vector<double>{-1, 1}), DomainError);
  EXPECT_THROW(natural_velocities(p, std::vector<double>{0, 1, 2}, std::vector<double>{-1, 1, 0}),
               ConfigError);
  EXPECT_THROW(natural_velocities(p, std::vector<double>{0, 1}, std::vector<double>{-1, 1},
                                  Normalization::Strict),
               NormalizationError);
  const ModelParams lr(2, 1.0, Potential(0.5));
  const auto nu = natural_velocities(lr, std::vector<double>{0, 0}, std::vector<double>{-1, 1});
  EXPECT_EQ(nu[0], -1.0);
  EXPECT_EQ(nu[1], 1.0);
}

TEST(Model, FirstOrderFieldMatchesOracle) {
  std::mt19937_64 rng(3);
  for (double beta : {0.4, 1.0, 2.0, 3.5}) {
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t n = 2 + trial % 7;
      const auto x = oracle::normals(rng, n, true, true);
      const auto nu = oracle::normals(rng, n);
      const ModelParams p(n, 0.7, Potential(beta));
      const auto got = rhs_first_order(p, FirstOrderState::from_particles(x, nu));
      const auto want = oracle::first_order_field(beta, 0.7, x, nu);
      for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(got[i], want[i], 1e-12 * (1 + std::fabs(want[i])));
    }
  }
}

TEST(Model, SecondOrderFieldMatchesOracle) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + trial % 6;
    const auto x = oracle::normals(rng, n, true, true);
    const auto v = oracle::normals(rng, n);
    const ModelParams p(n, 1.3, Potential(1.7));
    const auto got = rhs_second_order(p, SecondOrderState{x, v, 0.0});
    const auto want = oracle::second_order_accel(1.7, 1.3, x, v);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_EQ(got.velocity[i], v[i]);
      EXPECT_NEAR(got.acceleration[i], want[i], 1e-11 * (1 + std::fabs(want[i])));
    }
  }
}

TEST(Model, PropertyWeightedFieldConservesMomentum) {
  // Antisymmetry: sum_i w_i xdot_i = sum_i w_i nu_i.
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t g = 2 + trial % 6;
    FirstOrderState s;
    s.positions = oracle::normals(rng, g, true, true);
    s.natural_velocities = oracle::normals(rng, g, false);
    std::uniform_int_distribution<int> wd(1, 4);
    for (std::size_t k = 0; k < g; ++k) {
      s.weights.push_back(wd(rng));
      for (int r = 0; r < s.weights.back(); ++r) s.group_of.push_back(k);
    }
    const ModelParams p(s.particle_count(), 2.0, Potential(trial % 2 ? 0.5 : 2.5));
    const auto f = rhs_first_order(p, s);
    double lhs = 0, rhs = 0, scale = 0;
    for (std::size_t k = 0; k < g; ++k) {
      lhs += s.weights[k] * f[k];
      rhs += s.weights[k] * s.natural_velocities[k];
      // Rounding scales with the interaction terms that cancel in the sum.
      scale += s.weights[k] * (std::fabs(f[k] - s.natural_velocities[k]) + std::fabs(s.natural_velocities[k]));
    }
    EXPECT_NEAR(lhs, rhs, 1e-13 * (1 + scale));
  }
}

TEST(Model, MergeKeepsWeightedSums) {
  auto s = FirstOrderState::from_particles({-1.0, 0.0, 2.0, 3.0}, {0.5, 0.5, -0.25, -0.75});
  merge_groups(s, 1, 2);
  EXPECT_EQ(s.group_count(), 3u);
  EXPECT_EQ(s.weights, (std::vector<int>{1, 2, 1}));
  EXPECT_DOUBLE_EQ(s.positions[1], 1.0);
  EXPECT_DOUBLE_EQ(s.natural_velocities[1], 0.125);
  EXPECT_EQ(s.group_of, (std::vector<std::size_t>{0, 1, 1, 2}));
  EXPECT_EQ(s.particle_positions(), (std::vector<double>{-1.0, 1.0, 1.0, 3.0}));
  EXPECT_EQ(s.representative(1), 1u);
  merge_groups(s, 2, 0);
  EXPECT_EQ(s.group_of, (std::vector<std::size_t>{1, 0, 0, 1}));
  EXPECT_EQ(s.weights, (std::vector<int>{2, 2}));
  EXPECT_DOUBLE_EQ(s.positions[1], 1.0);
  EXPECT_NO_THROW(s.validate());
  EXPECT_THROW(merge_groups(s, 0, 0), DomainError);
}

TEST(Model, StateValidation) {
  auto s = FirstOrderState::from_particles({0.0, 1.0}, {0.0, 0.0});
  s.weights[0] = 2;
  EXPECT_THROW(s.validate(), DomainError);
  EXPECT_THROW(FirstOrderState::from_particles({0.0}, {0.0, 1.0}), ConfigError);
}

TEST(Model, SingularFieldThrows) {
  const ModelParams p(2, 1.0, Potential(2.0));
  EXPECT_THROW(rhs_first_order(p, FirstOrderState::from_particles({0.0, 0.0}, {0.0, 0.0})),
               SingularityError);
  EXPECT_THROW(rhs_second_order(p, SecondOrderState{{0.0, 0.0}, {0.0, 1.0}, 0.0}), SingularityError);
}
