#include <gtest/gtest.h>

#include <cmath>

#include "fedsel/domain.hpp"
#include "fedsel/error.hpp"

namespace fedsel {
namespace {

TEST(Topology, EdgeWithinRadius) {
  auto t = build_topology({{0.0, 0.0}, {0.3, 0.0}}, 0.5);
  EXPECT_TRUE(t.adjacent(0, 1));
  EXPECT_EQ(t.edge_count(), 1u);
}

TEST(Topology, NoEdgeBeyondRadius) {
  auto t = build_topology({{0.0, 0.0}, {0.3, 0.0}}, 0.2);
  EXPECT_FALSE(t.adjacent(0, 1));
  EXPECT_FALSE(t.is_connected());
  EXPECT_FALSE(t.diameter().has_value());
}

TEST(Topology, EmptyPositionsRejected) { EXPECT_THROW(build_topology({}, 0.5), ConfigError); }

TEST(Topology, NonPositiveRadiusRejected) { EXPECT_THROW(build_topology({{0, 0}}, 0.0), ConfigError); }

TEST(Topology, PositionOutsideAreaRejected) { EXPECT_THROW(build_topology({{0.5, 1.2}}, 0.5, 1.0), ConfigError); }

TEST(Topology, AsymmetricAdjacencyRejected) {
  EXPECT_THROW(Topology({{0, 0}, {1, 0}}, {0, 1, 0, 0}), ConfigError);
  EXPECT_THROW(Topology({{0, 0}, {1, 0}}, {1, 0, 0, 0}), ConfigError);
}

TEST(Topology, RandomPlacementsAreSymmetricWithZeroDiagonal) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    auto t = build_topology(uniform_positions(15, 1.0, rng), 0.35);
    for (ClientId i = 0; i < t.size(); ++i) {
      EXPECT_FALSE(t.adjacent(i, i));
      for (ClientId j = 0; j < t.size(); ++j) EXPECT_EQ(t.adjacent(i, j), t.adjacent(j, i));
    }
  }
}

TEST(Topology, PathDiameterAndHops) {
  auto t = build_topology({{0, 0}, {0.1, 0}, {0.2, 0}, {0.3, 0}, {0.4, 0}}, 0.15);
  ASSERT_TRUE(t.is_connected());
  EXPECT_EQ(*t.diameter(), 4u);
  EXPECT_EQ(t.hop_distances(0), (std::vector<std::size_t>{0, 1, 2, 3, 4}));
  EXPECT_NEAR(t.max_pairwise_distance(), 0.4, 1e-15);
}

TEST(PathLoss, ReferenceValues) {
  EXPECT_DOUBLE_EQ(path_loss_db(1.0), 128.1);
  EXPECT_NEAR(path_loss_db(0.1), 90.5, 1e-12);
  EXPECT_NEAR(path_loss_db(0.5), 128.1 - 37.6 * std::log10(2.0), 1e-12);
  EXPECT_NEAR(path_loss_db(0.5), 116.78127, 1e-5);
}

TEST(PathLoss, StrictlyIncreasing) {
  double prev = path_loss_db(0.001);
  for (double d = 0.002; d < 3.0; d += 0.001) {
    const double v = path_loss_db(d);
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(PathLoss, NonPositiveDistanceRejected) {
  EXPECT_THROW(path_loss_db(0.0), DomainError);
  EXPECT_THROW(path_loss_db(-1.0), DomainError);
}

TEST(Uplink, DegenerateProbabilities) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_TRUE(sample_uplink(1.0, rng));
    EXPECT_FALSE(sample_uplink(0.0, rng));
  }
}

TEST(Uplink, HalfProbabilityWithinThreeSigma) {
  Rng rng(2024);
  int hits = 0;
  for (int i = 0; i < 10000; ++i) hits += sample_uplink(0.5, rng) ? 1 : 0;
  EXPECT_NEAR(hits / 10000.0, 0.5, 0.015);
}

TEST(Uplink, SameSeedSameStream) {
  Rng a(99), b(99);
  for (int i = 0; i < 500; ++i) EXPECT_EQ(sample_uplink(0.3, a), sample_uplink(0.3, b));
}

TEST(Uplink, ThetaOutsideUnitIntervalRejected) {
  Rng rng(1);
  EXPECT_THROW(sample_uplink(1.5, rng), DomainError);
  EXPECT_THROW(sample_uplink(-0.1, rng), DomainError);
  EXPECT_THROW(sample_uplink(std::nan(""), rng), DomainError);
}

TEST(Channel, FixedRejectsInvalidTheta) {
  EXPECT_THROW(fixed_channel({0.5, 1.1}), ConfigError);
  EXPECT_EQ(fixed_channel({0.5, 1.0}).success_probability(1), 1.0);
}

TEST(Channel, PathlossThetaNonIncreasingInDistance) {
  std::vector<Point> pts;
  for (int i = 0; i < 40; ++i) pts.push_back({0.5 + 0.02 * i, 0.5});
  auto ch = pathloss_channel(pts, {0.5, 0.5}, PathLossChannel{});
  ASSERT_EQ(ch.theta.size(), pts.size());
  for (std::size_t i = 1; i < ch.theta.size(); ++i) {
    EXPECT_LE(ch.theta[i], ch.theta[i - 1]);
    EXPECT_GE(ch.theta[i], 0.0);
    EXPECT_LE(ch.theta[i], 1.0);
  }
}

TEST(Channel, PathlossHardThreshold) {
  PathLossChannel p;
  p.shadowing_std_db = 0.0;
  // SNR = 20 - PL(d) + 104 >= 0  <=>  PL(d) <= 124
  const double edge = std::pow(10.0, (124.0 - 128.1) / 37.6);
  auto ch = pathloss_channel(std::vector<Point>{{edge * 0.9, 0.0}, {edge * 1.1, 0.0}}, {0.0, 0.0}, p);
  EXPECT_EQ(ch.theta[0], 1.0);
  EXPECT_EQ(ch.theta[1], 0.0);
}

}  // namespace
}  // namespace fedsel
