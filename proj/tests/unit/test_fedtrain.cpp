#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>

#include "fedsel/error.hpp"
#include "fedsel/fedtrain.hpp"

namespace fedsel {
namespace {

PartitionConfig small_config(std::size_t clients, bool iid) {
  PartitionConfig c;
  c.clients = clients;
  c.sizes.assign(clients, 200);
  c.iid.assign(clients, iid);
  c.dim = 4;
  c.test_per_client = 50;
  c.global_test_size = 200;
  return c;
}

double positive_fraction(const Dataset& d) {
  return static_cast<double>(std::count(d.labels.begin(), d.labels.end(), 1)) / static_cast<double>(d.size());
}

// Objective minimized by local_sgd on a set of points.
double objective(const GlobalModel& m, const Dataset& d, double reg) {
  double s = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) s += std::max(0.0, 1.0 - d.labels[i] * m.score(d.row(i)));
  double w2 = 0.0;
  for (double w : m.weights) w2 += w * w;
  return 0.5 * reg * w2 + s / static_cast<double>(d.size());
}

TEST(Partition, IidClientsMatchGlobalLabelFrequency) {
  Rng rng(11);
  auto c = small_config(10, true);
  c.sizes.assign(10, 2000);
  Partition p = generate_partition(c, rng);
  const double global = positive_fraction(p.global_test);
  for (const Dataset& d : p.train) EXPECT_NEAR(positive_fraction(d), global, 0.05);
}

TEST(Partition, SingleLabelClientIsSingleValued) {
  Rng rng(3);
  auto c = small_config(1, false);
  Partition p = generate_partition(c, rng);
  const auto& labels = p.train[0].labels;
  EXPECT_TRUE(std::all_of(labels.begin(), labels.end(), [&](int y) { return y == labels.front(); }));
}

TEST(Partition, PrescribedSizes) {
  Rng rng(3);
  auto c = small_config(2, true);
  c.sizes = {100, 200};
  Partition p = generate_partition(c, rng);
  EXPECT_EQ(p.train[0].size(), 100u);
  EXPECT_EQ(p.train[1].size(), 200u);
  EXPECT_EQ(p.data_sizes(), (std::vector<double>{100.0, 200.0}));
}

TEST(Partition, PositiveShareSpreadsDominantClasses) {
  Rng rng(5);
  auto c = small_config(8, false);
  c.noniid_positive_share = 0.75;
  Partition p = generate_partition(c, rng);
  int positive = 0;
  for (const Dataset& d : p.train) positive += d.labels.front() == 1 ? 1 : 0;
  EXPECT_EQ(positive, 6);

  c.noniid_positive_share = 0.5;
  p = generate_partition(c, rng);
  for (std::size_t n = 0; n < 8; ++n) EXPECT_EQ(p.train[n].labels.front(), n % 2 == 0 ? 1 : -1);
}

TEST(Partition, TwoLabelClientsKeepMajorFraction) {
  Rng rng(8);
  auto c = small_config(2, false);
  c.sizes.assign(2, 5000);
  c.labels_per_noniid_client = 2;
  c.noniid_major_fraction = 0.8;
  Partition p = generate_partition(c, rng);
  EXPECT_NEAR(positive_fraction(p.train[0]), 0.8, 0.02);
  EXPECT_NEAR(positive_fraction(p.train[1]), 0.2, 0.02);
}

TEST(Partition, InvalidConfigsRejected) {
  Rng rng(1);
  auto c = small_config(2, true);
  c.dim = 0;
  EXPECT_THROW(generate_partition(c, rng), ConfigError);
  c = small_config(2, true);
  c.sizes = {10, 0};
  EXPECT_THROW(generate_partition(c, rng), ConfigError);
  c = small_config(2, true);
  c.labels_per_noniid_client = 0;
  EXPECT_THROW(generate_partition(c, rng), ConfigError);
}

TEST(Partition, DeterministicForSeed) {
  auto c = small_config(3, false);
  Rng a(42), b(42);
  Partition p = generate_partition(c, a), q = generate_partition(c, b);
  EXPECT_EQ(p.train[2].features, q.train[2].features);
  EXPECT_EQ(p.global_test.labels, q.global_test.labels);
}

TEST(LocalSgd, ZeroEpochsReturnsInput) {
  Rng rng(1);
  Partition p = generate_partition(small_config(1, true), rng);
  GlobalModel m{{0.1, -0.2, 0.3, 0.4}, 0.5, 3};
  EXPECT_EQ(local_sgd(m, p.train[0], {100, 0, 0.1, 0.01}, rng), m);
}

TEST(LocalSgd, SatisfiedMarginWithoutRegularizationIsFixed) {
  Dataset d;
  d.dim = 2;
  d.push_back(std::vector<double>{1.0, 1.0}, 1);
  GlobalModel m{{1.0, 1.0}, 0.0, 0};  // margin 2
  Rng rng(1);
  EXPECT_EQ(local_sgd(m, d, {1, 5, 0.5, 0.0}, rng), m);
  GlobalModel kink{{0.5, 0.5}, 0.0, 0};  // margin exactly 1
  EXPECT_EQ(local_sgd(kink, d, {1, 1, 0.5, 0.0}, rng), kink);
}

TEST(LocalSgd, OneStepMatchesHandSubgradient) {
  Dataset d;
  d.dim = 3;
  d.push_back(std::vector<double>{0.5, -1.0, 2.0}, -1);
  GlobalModel m{{0.2, 0.1, -0.3}, 0.05, 0};
  const double step = 0.1, reg = 0.01;
  Rng rng(1);
  GlobalModel out = local_sgd(m, d, {1, 1, step, reg}, rng);
  // margin -1 * (0.1 - 0.1 - 0.6 + 0.05) = 0.55 < 1, so the hinge is active
  const std::vector<double> expect{(1 - step * reg) * 0.2 - step * 0.5, (1 - step * reg) * 0.1 + step * 1.0,
                                   (1 - step * reg) * -0.3 - step * 2.0};
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(out.weights[i], expect[i], 1e-9);
  EXPECT_NEAR(out.bias, 0.05 - step, 1e-9);
}

TEST(LocalSgd, OneStepFollowsFiniteDifferenceGradient) {
  std::mt19937_64 gen(77);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int instance = 0; instance < 100; ++instance) {
    const std::size_t dim = 1 + instance % 6;
    Dataset d;
    d.dim = dim;
    std::vector<double> x(dim);
    for (double& v : x) v = g(gen);
    const int y = instance % 2 ? 1 : -1;
    d.push_back(x, y);
    GlobalModel m = GlobalModel::zeros(dim);
    for (double& w : m.weights) w = 0.3 * g(gen);
    m.bias = 0.3 * g(gen);
    if (std::fabs(1.0 - y * m.score(x)) < 1e-3) continue;  // too close to the kink for a central difference

    const double reg = 0.05, step = 1e-3, h = 1e-6;
    Rng rng(instance);
    GlobalModel out = local_sgd(m, d, {1, 1, step, reg}, rng);
    for (std::size_t i = 0; i <= dim; ++i) {
      GlobalModel hi = m, lo = m;
      (i < dim ? hi.weights[i] : hi.bias) += h;
      (i < dim ? lo.weights[i] : lo.bias) -= h;
      const double fd = (objective(hi, d, reg) - objective(lo, d, reg)) / (2 * h);
      const double applied = ((i < dim ? m.weights[i] : m.bias) - (i < dim ? out.weights[i] : out.bias)) / step;
      EXPECT_NEAR(applied, fd, 1e-4 * std::max(1.0, std::fabs(fd))) << "instance " << instance << " coord " << i;
    }
  }
}

TEST(LocalSgd, EmptyDataRejected) {
  Dataset d;
  d.dim = 2;
  Rng rng(1);
  EXPECT_THROW(local_sgd(GlobalModel::zeros(2), d, {}, rng), TrainingError);
}

TEST(LocalSgd, DeterministicForSeed) {
  Rng r0(9);
  Partition p = generate_partition(small_config(1, true), r0);
  Rng a(5), b(5);
  EXPECT_EQ(local_sgd(GlobalModel::zeros(4), p.train[0], {10, 3, 0.1, 0.01}, a),
            local_sgd(GlobalModel::zeros(4), p.train[0], {10, 3, 0.1, 0.01}, b));
}

TEST(Aggregate, SingleSuccessReturnsItsParameters) {
  std::vector<GlobalModel> locals{{{1.0, 2.0}, 3.0, 0}, {{9.0, 9.0}, 9.0, 0}};
  std::vector<std::uint8_t> ok{1, 0};
  GlobalModel out = aggregate(locals, ok, std::vector<double>{10, 10}, GlobalModel::zeros(2));
  EXPECT_EQ(out.weights, locals[0].weights);
  EXPECT_EQ(out.bias, 3.0);
  EXPECT_EQ(out.round, 1u);
}

TEST(Aggregate, EqualSizesGiveArithmeticMean) {
  std::vector<GlobalModel> locals{{{1.0, -2.0}, 0.0, 0}, {{3.0, 4.0}, 1.0, 0}};
  GlobalModel out = aggregate(locals, std::vector<std::uint8_t>{1, 1}, std::vector<double>{5, 5}, GlobalModel::zeros(2));
  EXPECT_DOUBLE_EQ(out.weights[0], 2.0);
  EXPECT_DOUBLE_EQ(out.weights[1], 1.0);
  EXPECT_DOUBLE_EQ(out.bias, 0.5);
}

TEST(Aggregate, SizeWeightedCoordinate) {
  std::vector<GlobalModel> locals{{{0.0}, 0.0, 0}, {{4.0}, 0.0, 0}};
  GlobalModel out = aggregate(locals, std::vector<std::uint8_t>{1, 1}, std::vector<double>{1, 3}, GlobalModel::zeros(1));
  EXPECT_DOUBLE_EQ(out.weights[0], 3.0);
}

TEST(Aggregate, AllFailuresKeepPrevious) {
  GlobalModel prev{{0.7, 0.8}, 0.9, 4};
  std::vector<GlobalModel> locals{{{1.0, 2.0}, 3.0, 0}};
  GlobalModel out = aggregate(locals, std::vector<std::uint8_t>{0}, std::vector<double>{10}, prev);
  EXPECT_EQ(out.weights, prev.weights);
  EXPECT_EQ(out.bias, prev.bias);
}

TEST(Aggregate, NegativeSizeRejected) {
  std::vector<GlobalModel> locals{{{1.0}, 0.0, 0}};
  EXPECT_THROW(aggregate(locals, std::vector<std::uint8_t>{1}, std::vector<double>{-1}, GlobalModel::zeros(1)),
               ConfigError);
}

TEST(Aggregate, ConvexHullOnRandomInstances) {
  std::mt19937_64 gen(123);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int inst = 0; inst < 200; ++inst) {
    const std::size_t k = 1 + inst % 6, dim = 1 + inst % 4;
    std::vector<GlobalModel> locals(k, GlobalModel::zeros(dim));
    std::vector<std::uint8_t> ok(k);
    std::vector<double> sizes(k);
    for (std::size_t j = 0; j < k; ++j) {
      for (double& w : locals[j].weights) w = u(gen);
      ok[j] = static_cast<std::uint8_t>(coin(gen));
      sizes[j] = 1.0 + std::fabs(u(gen)) * 100.0;
    }
    ok[inst % k] = 1;
    GlobalModel out = aggregate(locals, ok, sizes, GlobalModel::zeros(dim));
    for (std::size_t i = 0; i < dim; ++i) {
      double lo = INFINITY, hi = -INFINITY;
      for (std::size_t j = 0; j < k; ++j)
        if (ok[j]) lo = std::min(lo, locals[j].weights[i]), hi = std::max(hi, locals[j].weights[i]);
      EXPECT_GE(out.weights[i], lo - 1e-12);
      EXPECT_LE(out.weights[i], hi + 1e-12);
    }
  }
}

TEST(Evaluate, Examples) {
  Dataset d;
  d.dim = 1;
  d.push_back(std::vector<double>{2.0}, 1);
  d.push_back(std::vector<double>{-1.0}, -1);
  GlobalModel sep{{1.0}, 0.0, 0};
  EXPECT_DOUBLE_EQ(evaluate(sep, d), 1.0);
  GlobalModel constant{{0.0}, 1.0, 0};
  EXPECT_DOUBLE_EQ(evaluate(constant, d), 0.5);
  d.push_back(std::vector<double>{-3.0}, 1);
  EXPECT_NEAR(evaluate(sep, d), 2.0 / 3.0, 1e-15);
}

TEST(Evaluate, EmptyTestSetRejected) {
  Dataset d;
  d.dim = 1;
  EXPECT_THROW(evaluate(GlobalModel::zeros(1), d), EvaluationError);
}

TEST(AverageOpinion, Examples) {
  EXPECT_DOUBLE_EQ(average_opinion(std::vector<double>(7, 0.7)), 0.7);
  EXPECT_DOUBLE_EQ(average_opinion(std::vector<double>{0.0, 1.0}), 0.5);
  EXPECT_NEAR(average_opinion(std::vector<double>{0.2, 0.5, 0.8, 0.9}), 0.6, 1e-15);
  EXPECT_THROW(average_opinion(std::vector<double>{}), DomainError);
}

class RoundBlock : public ::testing::Test {
 protected:
  void SetUp() override {
    Rng rng(31);
    auto c = small_config(3, true);
    partition = generate_partition(c, rng);
    // clients 0 and 1 share one training set
    partition.train[1] = partition.train[0];
  }
  Partition partition;
  TrainingParams params{50, 2, 0.05, 0.01};
};

TEST_F(RoundBlock, OneRoundOneClientEqualsLocalSgd) {
  const std::vector<ClientId> sel{2};
  auto ch = fixed_channel({1.0, 1.0, 1.0});
  BlockResult r = run_fl_round_block(GlobalModel::zeros(4), sel, ch, partition, params, 1, 17);
  Rng train_rng = make_rng(17, 2, "sgd");
  GlobalModel direct = local_sgd(GlobalModel::zeros(4), partition.train[2], params, train_rng);
  EXPECT_EQ(r.model.weights, direct.weights);
  EXPECT_EQ(r.model.bias, direct.bias);
  EXPECT_EQ(r.successful_uploads, 1u);
}

TEST_F(RoundBlock, LRoundsOneClientEqualSequentialLocalSgd) {
  const std::vector<ClientId> sel{2};
  auto ch = fixed_channel({1.0, 1.0, 1.0});
  const std::size_t L = 4;
  BlockResult r = run_fl_round_block(GlobalModel::zeros(4), sel, ch, partition, params, L, 5);
  GlobalModel m = GlobalModel::zeros(4);
  for (std::size_t l = 0; l < L; ++l) {
    Rng train_rng = make_rng(5, l * partition.clients() + 2, "sgd");
    m = local_sgd(m, partition.train[2], params, train_rng);
  }
  EXPECT_EQ(r.model.weights, m.weights);
  EXPECT_EQ(r.model.bias, m.bias);
}

TEST_F(RoundBlock, AllUplinksFailKeepsModel) {
  GlobalModel start{{0.1, 0.2, 0.3, 0.4}, -0.1, 0};
  auto ch = fixed_channel({0.0, 0.0, 0.0});
  BlockResult r = run_fl_round_block(start, std::vector<ClientId>{0, 2}, ch, partition, params, 6, 1);
  EXPECT_EQ(r.model.weights, start.weights);
  EXPECT_EQ(r.model.bias, start.bias);
  EXPECT_EQ(r.empty_rounds, 6u);
  EXPECT_EQ(r.successful_uploads, 0u);
}

TEST_F(RoundBlock, IdenticalDatasetsAggregateToEither) {
  auto ch = fixed_channel({1.0, 1.0, 1.0});
  // one batch per epoch, so the two clients' different shuffles only reorder a sum
  TrainingParams full_batch{1000, 3, 0.05, 0.01};
  BlockResult r = run_fl_round_block(GlobalModel::zeros(4), std::vector<ClientId>{0, 1}, ch, partition, full_batch, 3, 2);
  GlobalModel m = GlobalModel::zeros(4);
  for (int l = 0; l < 3; ++l) {
    Rng rng(0);
    m = local_sgd(m, partition.train[0], full_batch, rng);
  }
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(r.model.weights[i], m.weights[i], 1e-12);
  EXPECT_NEAR(r.model.bias, m.bias, 1e-12);
}

TEST_F(RoundBlock, DeterministicForSeed) {
  auto ch = fixed_channel({0.6, 0.6, 0.6});
  auto a = run_fl_round_block(GlobalModel::zeros(4), std::vector<ClientId>{0, 1, 2}, ch, partition, params, 5, 99);
  auto b = run_fl_round_block(GlobalModel::zeros(4), std::vector<ClientId>{0, 1, 2}, ch, partition, params, 5, 99);
  EXPECT_EQ(a.model, b.model);
  EXPECT_EQ(a.successful_uploads, b.successful_uploads);
}

TEST(PartitionCsv, RoundTrip) {
  Rng rng(2);
  auto c = small_config(2, false);
  c.sizes = {5, 7};
  c.test_per_client = 3;
  c.global_test_size = 4;
  Partition p = generate_partition(c, rng);
  const auto path = (std::filesystem::temp_directory_path() / "fedsel_partition_roundtrip.csv").string();
  write_partition_csv(p, path);
  Partition q = read_partition_csv(path);
  std::remove(path.c_str());
  ASSERT_EQ(q.clients(), 2u);
  EXPECT_EQ(q.dim, p.dim);
  for (std::size_t n = 0; n < 2; ++n) {
    EXPECT_EQ(q.train[n].labels, p.train[n].labels);
    EXPECT_EQ(q.test[n].labels, p.test[n].labels);
    ASSERT_EQ(q.train[n].features.size(), p.train[n].features.size());
    for (std::size_t i = 0; i < p.train[n].features.size(); ++i)
      EXPECT_EQ(q.train[n].features[i], p.train[n].features[i]);
  }
  EXPECT_EQ(q.global_test.labels, p.global_test.labels);
}

TEST(PartitionCsv, MissingFileIsIoError) { EXPECT_THROW(read_partition_csv("/nonexistent/x.csv"), IoError); }

}  // namespace
}  // namespace fedsel
