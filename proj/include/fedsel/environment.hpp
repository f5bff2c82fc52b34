#pragma once

// Reward environments: what happens after a client set has been chosen for a slot.
// Both return the opinions of all N clients about the resulting global model.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "fedsel/config.hpp"
#include "fedsel/domain.hpp"
#include "fedsel/fedtrain.hpp"
#include "fedsel/rng.hpp"

namespace fedsel {

class Environment {
 public:
  virtual ~Environment() = default;
  // Plays slot t with the given sorted client set; returns N opinions in [0,1].
  virtual std::vector<double> play(std::size_t t, std::span<const ClientId> selected) = 0;
  // Accuracy of the current global model on the shared test set; NaN when there is no model.
  virtual double accuracy() const { return std::numeric_limits<double>::quiet_NaN(); }
  virtual std::size_t successful_uploads() const noexcept { return 0; }
};

// Expected reward of each client set, independent of history.
class ArmMeans {
 public:
  // Per-client qualities: a set's mean is the average quality of its members.
  static ArmMeans from_quality(std::vector<double> quality, std::size_t k);
  // Explicit table over the lexicographically ordered K-subsets of N clients.
  static ArmMeans from_table(std::vector<double> means, std::size_t n, std::size_t k);
  static ArmMeans from_config(const ScenarioConfig& config);

  std::size_t clients() const noexcept { return n_; }
  std::size_t set_size() const noexcept { return k_; }
  double mean(std::span<const ClientId> set) const;
  // Highest-mean set, lowest lexicographic rank on ties, and its mean.
  const std::vector<ClientId>& best_set() const noexcept { return best_; }
  double best_mean() const noexcept { return best_mean_; }
  double gap(std::span<const ClientId> set) const { return best_mean_ - mean(set); }
  // Means of every arm in lexicographic order. Throws ScalabilityError above `cap` arms.
  std::vector<double> all(std::size_t cap) const;

 private:
  std::size_t n_ = 0, k_ = 0;
  std::vector<double> quality_;
  std::vector<double> table_;
  std::vector<ClientId> best_;
  double best_mean_ = 0.0;
};

// Every client independently draws its opinion from Bernoulli(m) or Beta(m c, (1 - m) c),
// where m is the mean of the played set; the reward (average opinion) has expectation m.
class OracleEnvironment final : public Environment {
 public:
  OracleEnvironment(ArmMeans means, OpinionDistribution distribution, double concentration, Rng rng);
  std::vector<double> play(std::size_t t, std::span<const ClientId> selected) override;
  const ArmMeans& means() const noexcept { return means_; }

 private:
  ArmMeans means_;
  OpinionDistribution distribution_;
  double concentration_;
  Rng rng_;
};

// Persistent global model trained for L rounds per slot by the selected clients; every
// client then scores the broadcast model on its local test split.
class FederatedEnvironment final : public Environment {
 public:
  FederatedEnvironment(std::shared_ptr<const Partition> partition, ChannelModel channel, TrainingParams training,
                       std::size_t rounds, std::uint64_t episode_seed);
  std::vector<double> play(std::size_t t, std::span<const ClientId> selected) override;
  double accuracy() const override { return accuracy_; }
  std::size_t successful_uploads() const noexcept override { return uploads_; }
  const GlobalModel& model() const noexcept { return model_; }

 private:
  std::shared_ptr<const Partition> partition_;
  ChannelModel channel_;
  TrainingParams training_;
  std::size_t rounds_;
  std::uint64_t seed_;
  GlobalModel model_;
  double accuracy_;
  std::size_t uploads_ = 0;
};

// Per-trial data set for a federated scenario (sizes, i.i.d. flags, label skew from config).
Partition make_partition(const ScenarioConfig& config, Rng& rng);

}  // namespace fedsel
