#pragma once

// Closed-loop episodes (select, train, broadcast, evaluate, update), Monte Carlo
// aggregation over seeded trials and the summary metrics built from them.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "fedsel/config.hpp"
#include "fedsel/domain.hpp"
#include "fedsel/environment.hpp"
#include "fedsel/gossip.hpp"

namespace fedsel {

// Everything shared read-only by the trials of one scenario.
struct Scenario {
  ScenarioConfig config;
  Topology topology;
  ChannelModel channel;
  std::optional<ArmMeans> arm_means;  // oracle reward mode only
  std::vector<ClientId> optimal_set;  // what the oracle policy plays
  std::vector<std::vector<ClientId>> round_robin_sets;
  std::optional<GapStats> gap_stats;  // oracle mode when the arm space is enumerable
  std::size_t num_arms = 0;           // C(N,K), saturating
};

// Places clients (re-drawing uniform placements until connected when required), derives the
// channel and the oracle arm means. Throws ConfigError when no acceptable placement exists.
Scenario build_scenario(const ScenarioConfig& config);

struct SlotRecord {
  std::size_t slot = 0;
  std::vector<ClientId> selected;
  std::optional<ArmId> arm;  // lexicographic id of `selected`
  std::vector<double> opinions;
  double reward = 0.0;
  double regret = 0.0;    // cumulative pseudo-regret; NaN without oracle arm means
  double accuracy = 0.0;  // global-model accuracy; NaN in oracle mode
  std::size_t gossip_rounds = 0;
  std::size_t successful_uploads = 0;
  std::vector<ClientBanditState> clients;  // bp_ucb: per-client index state at selection time
};

struct EpisodeTrace {
  Algorithm algorithm = Algorithm::random;
  std::vector<SlotRecord> slots;
  std::vector<BpSlotDiagnostics> bp;  // bp_ucb only, one entry per slot
  std::vector<std::size_t> selection_counts;  // per client

  std::vector<double> accuracy_curve() const;
  std::vector<double> regret_curve() const;
  std::vector<double> reward_curve() const;
};

// One trial. All randomness (data, uplinks, SGD shuffles, opinions, random choices) is
// derived from `episode_seed`.
EpisodeTrace run_episode(const Scenario& scenario, Algorithm algorithm, std::uint64_t episode_seed);

// First 1-based slot with accuracy >= target, nullopt if never reached.
std::optional<std::size_t> time_to_accuracy(std::span<const double> accuracy, double target);
std::optional<std::size_t> time_to_accuracy(const EpisodeTrace& trace, double target);

// Mean per-client selection count over the traces.
std::vector<double> selection_histogram(std::span<const EpisodeTrace> traces);

struct CurveStats {
  std::vector<double> mean;
  std::vector<double> std;  // population standard deviation over trials
};

struct MetricsReport {
  Algorithm algorithm = Algorithm::random;
  RewardMode reward_mode = RewardMode::federated;
  std::size_t trials = 0;
  std::size_t horizon = 0;
  CurveStats accuracy;
  CurveStats reward;
  CurveStats regret;
  std::vector<double> bound;  // regret bound per slot; NaN where undefined
  std::vector<double> selection_counts;
  double target_accuracy = 0.75;
  std::optional<std::size_t> tta_of_mean;  // on the mean accuracy curve
  double tta_mean = 0.0;                   // per-trial average, unreached trials counted as T
  std::size_t tta_reached = 0;             // trials that reached the target
  double final_accuracy_mean = 0.0;
  double final_accuracy_std = 0.0;
  std::vector<EpisodeTrace> traces;  // kept when requested
};

struct MonteCarloOptions {
  std::size_t trials = 1;
  std::size_t threads = 0;  // 0: hardware concurrency
  bool keep_traces = false;
  // Called from worker threads with each finished trace, before it is summarized.
  std::function<void(std::size_t trial, const EpisodeTrace&)> on_trace;
};

// Seed of trial i under the scenario's master seed.
std::uint64_t trial_seed(std::uint64_t master, std::size_t trial) noexcept;

// Runs the trials concurrently; the report depends only on the scenario, algorithm and
// trial count, never on the thread count.
MetricsReport monte_carlo(const Scenario& scenario, Algorithm algorithm, const MonteCarloOptions& options);

// Regret bound for the algorithm at horizon t under the scenario's gap statistics
// (quick_init_ucb / conventional_ucb: super-arm bound, bp_ucb: client-level bound).
std::optional<double> regret_bound(const Scenario& scenario, Algorithm algorithm, std::size_t t);

}  // namespace fedsel
