#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedsel/domain.hpp"
#include "fedsel/rng.hpp"

namespace fedsel {

// Row-major labelled samples; labels are -1 or +1.
struct Dataset {
  std::size_t dim = 0;
  std::vector<double> features;
  std::vector<int> labels;

  std::size_t size() const noexcept { return labels.size(); }
  bool empty() const noexcept { return labels.empty(); }
  std::span<const double> row(std::size_t i) const { return {features.data() + i * dim, dim}; }
  void push_back(std::span<const double> x, int y);
};

struct Partition {
  std::size_t dim = 0;
  std::vector<Dataset> train;  // per client
  std::vector<Dataset> test;   // per client, disjoint from train
  Dataset global_test;         // shared held-out set for global-model accuracy

  std::size_t clients() const noexcept { return train.size(); }
  // |D_n| as used by the weighted average.
  std::vector<double> data_sizes() const;
};

enum class LocalTestDistribution {
  global,  // clients test on balanced draws from the population (default)
  local,   // clients test on draws from their own skewed label distribution
};

struct PartitionConfig {
  std::size_t clients = 20;
  std::vector<std::size_t> sizes;  // per-client training-set size
  std::size_t dim = 10;
  std::vector<bool> iid;  // per client; non-i.i.d. clients get skewed labels
  std::size_t labels_per_noniid_client = 1;  // 1: single class, 2: both classes with a dominant one
  double noniid_major_fraction = 0.9;        // share of the dominant class when labels_per_noniid_client = 2
  double noniid_positive_share = 0.5;        // fraction of non-i.i.d. clients whose dominant class is +1
  std::size_t test_per_client = 100;
  std::size_t global_test_size = 2000;
  double separation = 1.3;  // distance of each class mean from the mixture center
  double offset = 0.0;      // distance of the mixture center from the origin, along the same axis
  double noise_std = 1.0;
  LocalTestDistribution local_test = LocalTestDistribution::global;
};

// Two-class Gaussian mixture with means (offset +/- separation) * (1,...,1)/sqrt(dim).
// Non-i.i.d. clients get dominant class +1 or -1, spread evenly in id order so that a
// fraction noniid_positive_share of them is +1 (0.5 alternates +1, -1, +1, ...).
Partition generate_partition(const PartitionConfig& config, Rng& rng);

struct GlobalModel {
  std::vector<double> weights;
  double bias = 0.0;
  std::size_t round = 0;

  static GlobalModel zeros(std::size_t dim) { return GlobalModel{std::vector<double>(dim, 0.0), 0.0, 0}; }
  double score(std::span<const double> x) const;
  int predict(std::span<const double> x) const { return score(x) >= 0.0 ? 1 : -1; }
  bool finite() const noexcept;
  bool operator==(const GlobalModel&) const = default;
};

struct TrainingParams {
  std::size_t batch = 100;
  std::size_t epochs = 10;
  double step = 0.01;
  double reg = 1e-4;  // L2 weight on ||w||^2 / 2; the bias is not regularized
};

// Mini-batch subgradient descent on   reg/2 ||w||^2 + mean(max(0, 1 - y (w.x + b))).
// A margin of exactly 1 contributes a zero subgradient. Samples are reshuffled every epoch.
GlobalModel local_sgd(const GlobalModel& model, const Dataset& data, const TrainingParams& params, Rng& rng);

// Success-weighted FedAvg:  sum_k X_k |D_k| w_k / sum_k X_k |D_k|.
// Returns `previous` (round advanced) when no weight survives.
GlobalModel aggregate(std::span<const GlobalModel> local_models, std::span<const std::uint8_t> uplink_ok,
                      std::span<const double> data_sizes, const GlobalModel& previous);

// Classification accuracy in [0,1]. Throws EvaluationError on an empty set.
double evaluate(const GlobalModel& model, const Dataset& test);

// Arithmetic mean of the opinions. Throws DomainError when empty.
double average_opinion(std::span<const double> opinions);

struct BlockResult {
  GlobalModel model;
  std::size_t successful_uploads = 0;
  std::size_t empty_rounds = 0;  // rounds in which every uplink failed
};

// L rounds of {local SGD on each selected client, Bernoulli uplinks, aggregation}, starting
// from `start`. Shuffling and uplink draws are derived from `block_seed`, so the outcome is a
// pure function of the inputs. Clients whose uplink fails skip training; every client has its
// own per-round stream, so this never shifts another client's draws.
BlockResult run_fl_round_block(const GlobalModel& start, std::span<const ClientId> selected,
                               const ChannelModel& channel, const Partition& partition,
                               const TrainingParams& params, std::size_t rounds, std::uint64_t block_seed);

// CSV dump: client,split,label,x0,...,x{d-1}; split is train|test|global and the global
// test set uses client id -1.
void write_partition_csv(const Partition& partition, const std::string& path);
Partition read_partition_csv(const std::string& path);

}  // namespace fedsel
