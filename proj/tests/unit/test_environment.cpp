#include <gtest/gtest.h>

#include <numeric>

#include "fedsel/environment.hpp"
#include "fedsel/error.hpp"

namespace fedsel {
namespace {

TEST(ArmMeans, FromQualityAveragesMembers) {
  auto m = ArmMeans::from_quality({0.9, 0.1, 0.5, 0.7}, 2);
  EXPECT_NEAR(m.mean(std::vector<ClientId>{0, 2}), 0.7, 1e-15);
  EXPECT_EQ(m.best_set(), (std::vector<ClientId>{0, 3}));
  EXPECT_NEAR(m.best_mean(), 0.8, 1e-15);
  EXPECT_NEAR(m.gap(std::vector<ClientId>{1, 2}), 0.5, 1e-15);
  EXPECT_EQ(m.all(100).size(), 6u);
  EXPECT_THROW(m.mean(std::vector<ClientId>{0}), DomainError);
  EXPECT_THROW(ArmMeans::from_quality({0.5, 1.2}, 1), ConfigError);
}

TEST(ArmMeans, FromTablePicksLowestRankOnTies) {
  auto m = ArmMeans::from_table({0.2, 0.9, 0.9, 0.1, 0.3, 0.4}, 4, 2);
  EXPECT_EQ(m.best_set(), (std::vector<ClientId>{0, 2}));
  EXPECT_EQ(m.mean(std::vector<ClientId>{1, 2}), 0.1);
  EXPECT_THROW(ArmMeans::from_table({0.5, 0.5}, 4, 2), ConfigError);
}

TEST(OracleEnvironment, BernoulliOpinionsHaveArmMean) {
  auto m = ArmMeans::from_quality({0.8, 0.4, 0.6}, 2);
  OracleEnvironment env(m, OpinionDistribution::bernoulli, 20.0, Rng(5));
  double sum = 0.0;
  const std::vector<ClientId> set{0, 1};
  for (int t = 1; t <= 4000; ++t) {
    auto r = env.play(t, set);
    ASSERT_EQ(r.size(), 3u);
    for (double v : r) EXPECT_TRUE(v == 0.0 || v == 1.0);
    sum += std::accumulate(r.begin(), r.end(), 0.0) / 3.0;
  }
  EXPECT_NEAR(sum / 4000, 0.6, 0.015);
  EXPECT_TRUE(std::isnan(env.accuracy()));
}

TEST(OracleEnvironment, BetaOpinionsInUnitIntervalWithArmMean) {
  auto m = ArmMeans::from_quality({0.3, 0.5}, 1);
  OracleEnvironment env(m, OpinionDistribution::beta, 10.0, Rng(6));
  double sum = 0.0;
  for (int t = 1; t <= 4000; ++t) {
    auto r = env.play(t, std::vector<ClientId>{0});
    for (double v : r) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    sum += (r[0] + r[1]) / 2.0;
  }
  EXPECT_NEAR(sum / 4000, 0.3, 0.01);
}

TEST(FederatedEnvironment, OpinionsAreLocalAccuracies) {
  ScenarioConfig c = parse_config(R"({"N": 4, "K": 2, "T": 5, "L": 3, "data": {"iid_clients": [0, 1],
      "size_min": 50, "size_max": 50, "test_per_client": 40, "global_test_size": 300}})");
  Rng rng(3);
  auto part = std::make_shared<const Partition>(make_partition(c, rng));
  FederatedEnvironment env(part, fixed_channel(std::vector<double>(4, 1.0)), c.training, c.L, 77);
  const GlobalModel start = env.model();
  auto r = env.play(1, std::vector<ClientId>{0, 1});
  EXPECT_NE(env.model(), start);
  EXPECT_EQ(env.model().round, 3u);
  EXPECT_EQ(env.successful_uploads(), 6u);
  for (ClientId n = 0; n < 4; ++n) EXPECT_DOUBLE_EQ(r[n], evaluate(env.model(), part->test[n]));
  EXPECT_DOUBLE_EQ(env.accuracy(), evaluate(env.model(), part->global_test));
}

TEST(FederatedEnvironment, ChannelSizeMustMatch) {
  ScenarioConfig c = parse_config(R"({"N": 2, "K": 1, "T": 2, "data": {"iid_clients": [0, 1]}})");
  Rng rng(1);
  auto part = std::make_shared<const Partition>(make_partition(c, rng));
  EXPECT_THROW(FederatedEnvironment(part, fixed_channel({1.0}), c.training, 1, 1), ConfigError);
}

TEST(MakePartition, UsesConfiguredSizesAndFlags) {
  ScenarioConfig c = parse_config(R"({"N": 3, "K": 1, "T": 3, "data": {"iid_clients": [2], "sizes": [10, 20, 30]}})");
  Rng rng(1);
  Partition p = make_partition(c, rng);
  EXPECT_EQ(p.train[1].size(), 20u);
  const auto& l0 = p.train[0].labels;
  EXPECT_TRUE(std::all_of(l0.begin(), l0.end(), [&](int y) { return y == l0.front(); }));
}

}  // namespace
}  // namespace fedsel
