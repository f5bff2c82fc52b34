#include "fedsel/environment.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "fedsel/bandit.hpp"
#include "fedsel/error.hpp"

namespace fedsel {

ArmMeans ArmMeans::from_quality(std::vector<double> quality, std::size_t k) {
  const std::size_t n = quality.size();
  if (k < 1 || k > n) throw ConfigError("oracle: need 1 <= K <= N");
  for (double q : quality)
    if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("oracle: client quality outside [0,1]");
  ArmMeans m;
  m.n_ = n;
  m.k_ = k;
  m.quality_ = std::move(quality);
  // top-K qualities; stable order keeps the lowest ids among equal qualities
  std::vector<ClientId> order(n);
  std::iota(order.begin(), order.end(), ClientId{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](ClientId a, ClientId b) { return m.quality_[a] > m.quality_[b]; });
  m.best_.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(m.best_.begin(), m.best_.end());
  m.best_mean_ = m.mean(m.best_);
  return m;
}

ArmMeans ArmMeans::from_table(std::vector<double> means, std::size_t n, std::size_t k) {
  if (means.size() != binomial(n, k)) throw ConfigError("oracle: arm_means must hold C(N,K) values");
  for (double v : means)
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("oracle: arm mean outside [0,1]");
  ArmMeans m;
  m.n_ = n;
  m.k_ = k;
  m.table_ = std::move(means);
  const auto best = static_cast<ArmId>(std::max_element(m.table_.begin(), m.table_.end()) - m.table_.begin());
  m.best_ = arm_unrank(best, n, k);
  m.best_mean_ = m.table_[best];
  return m;
}

ArmMeans ArmMeans::from_config(const ScenarioConfig& c) {
  if (!c.oracle.arm_means.empty()) return from_table(c.oracle.arm_means, c.N, c.K);
  if (c.oracle.client_quality.empty()) throw ConfigError("oracle: client_quality or arm_means required");
  return from_quality(c.oracle.client_quality, c.K);
}

double ArmMeans::mean(std::span<const ClientId> set) const {
  if (set.size() != k_) throw DomainError("oracle: set size must be K");
  if (!table_.empty()) return table_[arm_rank(set, n_)];
  double s = 0.0;
  for (ClientId c : set) s += quality_.at(c);
  return s / static_cast<double>(k_);
}

std::vector<double> ArmMeans::all(std::size_t cap) const {
  if (!table_.empty()) return table_;
  std::vector<double> out;
  for (const SuperArm& a : enumerate_arms(n_, k_, cap)) out.push_back(mean(a.members));
  return out;
}

OracleEnvironment::OracleEnvironment(ArmMeans means, OpinionDistribution distribution, double concentration, Rng rng)
    : means_(std::move(means)), distribution_(distribution), concentration_(concentration), rng_(rng) {
  if (!(concentration > 0.0)) throw ConfigError("oracle: concentration must be positive");
}

std::vector<double> OracleEnvironment::play(std::size_t, std::span<const ClientId> selected) {
  const double m = means_.mean(selected);
  std::vector<double> r(means_.clients());
  if (distribution_ == OpinionDistribution::bernoulli || m == 0.0 || m == 1.0) {
    std::bernoulli_distribution coin(m);
    for (double& v : r) v = coin(rng_) ? 1.0 : 0.0;
    return r;
  }
  std::gamma_distribution<double> ga(m * concentration_, 1.0);
  std::gamma_distribution<double> gb((1.0 - m) * concentration_, 1.0);
  for (double& v : r) {
    const double a = ga(rng_);
    const double b = gb(rng_);
    v = a + b > 0.0 ? a / (a + b) : m;
  }
  return r;
}

FederatedEnvironment::FederatedEnvironment(std::shared_ptr<const Partition> partition, ChannelModel channel,
                                           TrainingParams training, std::size_t rounds, std::uint64_t episode_seed)
    : partition_(std::move(partition)),
      channel_(std::move(channel)),
      training_(training),
      rounds_(rounds),
      seed_(episode_seed),
      model_(GlobalModel::zeros(partition_->dim)) {
  if (channel_.theta.size() != partition_->clients())
    throw ConfigError("federated: channel must give one theta per client");
  accuracy_ = evaluate(model_, partition_->global_test);
}

std::vector<double> FederatedEnvironment::play(std::size_t t, std::span<const ClientId> selected) {
  const BlockResult block = run_fl_round_block(model_, selected, channel_, *partition_, training_, rounds_,
                                               derive_seed(seed_, t, "block"));
  model_ = block.model;
  uploads_ = block.successful_uploads;
  accuracy_ = evaluate(model_, partition_->global_test);
  std::vector<double> opinions(partition_->clients());
  for (ClientId c = 0; c < opinions.size(); ++c) opinions[c] = evaluate(model_, partition_->test[c]);
  return opinions;
}

Partition make_partition(const ScenarioConfig& c, Rng& rng) {
  PartitionConfig pc;
  pc.clients = c.N;
  pc.dim = c.data.dim;
  pc.iid.assign(c.N, false);
  for (ClientId id : c.data.iid_clients) pc.iid.at(id) = true;
  pc.labels_per_noniid_client = c.data.labels_per_noniid_client;
  pc.noniid_major_fraction = c.data.noniid_major_fraction;
  pc.noniid_positive_share = c.data.noniid_positive_share;
  if (!c.data.sizes.empty()) {
    pc.sizes = c.data.sizes;
  } else {
    std::uniform_int_distribution<std::size_t> size(c.data.size_min, c.data.size_max);
    pc.sizes.resize(c.N);
    for (auto& s : pc.sizes) s = c.data.size_min == c.data.size_max ? c.data.size_min : size(rng);
  }
  pc.test_per_client = c.data.test_per_client;
  pc.global_test_size = c.data.global_test_size;
  pc.separation = c.data.separation;
  pc.offset = c.data.offset;
  pc.noise_std = c.data.noise_std;
  pc.local_test = c.data.local_test;
  return generate_partition(pc, rng);
}

}  // namespace fedsel
