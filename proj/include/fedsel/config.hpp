#pragma once

// Scenario configuration. Files are JSON objects whose keys mirror the structs
// below; unknown keys are rejected at every level and every value is validated
// on load (ConfigError with the offending key path).

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fedsel/bandit.hpp"
#include "fedsel/beliefprop.hpp"
#include "fedsel/domain.hpp"
#include "fedsel/fedtrain.hpp"

namespace fedsel {

enum class RewardMode { oracle, federated };
enum class Algorithm { quick_init_ucb, bp_ucb, random, round_robin, conventional_ucb, oracle };
enum class OpinionDistribution { bernoulli, beta };
enum class Grouping { sequential, shuffled };
enum class Placement { uniform, fixed };

std::string_view to_string(RewardMode m) noexcept;
std::string_view to_string(Algorithm a) noexcept;
RewardMode parse_reward_mode(std::string_view s);
Algorithm parse_algorithm(std::string_view s);

struct TopologyConfig {
  Placement placement = Placement::uniform;
  double area_km = 1.0;
  std::vector<Point> positions;  // used when placement = fixed
  double link_radius_km = 0.4;
  bool require_connected = true;
  std::size_t placement_attempts = 1000;  // uniform placements re-drawn until connected
};

struct ChannelConfig {
  ChannelMode mode = ChannelMode::fixed;
  std::vector<double> theta{1.0};  // one value for all clients, or one per client
  PathLossChannel pathloss;
};

struct BpConfig {
  double c_db = -30.0;
  double beta = 3.7;
  double tol = 1e-9;
  std::size_t max_iter = 1000;
  double damping = 0.0;
  Potentials potentials = Potentials::separable;

  BpParams params() const;
};

struct DataConfig {
  std::size_t dim = 10;
  std::vector<ClientId> iid_clients{0, 1, 2, 3, 4};
  std::size_t labels_per_noniid_client = 1;
  double noniid_major_fraction = 0.9;
  double noniid_positive_share = 0.5;
  std::vector<std::size_t> sizes;  // empty: draw uniformly from [size_min, size_max]
  std::size_t size_min = 200;
  std::size_t size_max = 200;
  std::size_t test_per_client = 100;
  std::size_t global_test_size = 2000;
  double separation = 1.3;
  double offset = 0.0;
  double noise_std = 1.0;
  LocalTestDistribution local_test = LocalTestDistribution::global;
};

struct OracleConfig {
  std::vector<double> client_quality;  // arm mean = average quality of its members
  std::vector<double> arm_means;       // explicit per-arm means (lexicographic arm order)
  OpinionDistribution distribution = OpinionDistribution::bernoulli;
  double concentration = 20.0;  // Beta(m c, (1 - m) c)
};

struct BaselineConfig {
  std::vector<std::vector<ClientId>> round_robin_sets;  // empty: ceil(N/K) seeded random sets
  std::vector<ClientId> optimal_set;                    // empty: the first K i.i.d. clients
};

struct ScenarioConfig {
  std::size_t N = 20;
  std::size_t K = 5;
  std::size_t T = 200;
  std::size_t L = 15;
  double mu = 1.0;
  double mu_bp = 0.01;
  std::uint64_t seed = 1;
  RewardMode reward_mode = RewardMode::federated;
  std::size_t arm_cap = kDefaultArmCap;
  Grouping grouping = Grouping::sequential;
  double target_accuracy = 0.75;
  std::vector<std::size_t> log_slots;  // slots recorded in bounds.csv; empty: every slot

  TopologyConfig topology;
  ChannelConfig channel;
  BpConfig bp;
  TrainingParams training{100, 10, 0.01, 1e-4};
  DataConfig data;
  OracleConfig oracle;
  BaselineConfig baselines;

  std::size_t init_slots() const noexcept { return (N + K - 1) / K; }
  // Throws ConfigError on any violated constraint.
  void validate() const;
};

ScenarioConfig parse_config(std::string_view json_text);
ScenarioConfig load_config(const std::string& path);
std::string dump_config(const ScenarioConfig& config);

}  // namespace fedsel
