#include "fedsel/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <string>
#include <thread>

#include "fedsel/bandit.hpp"
#include "fedsel/error.hpp"
#include "fedsel/fedtrain.hpp"

namespace fedsel {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<Point> place_clients(const ScenarioConfig& c) {
  if (c.topology.placement == Placement::fixed) return c.topology.positions;
  for (std::size_t attempt = 0; attempt < c.topology.placement_attempts; ++attempt) {
    Rng rng = make_rng(c.seed, attempt, "placement");
    auto positions = uniform_positions(c.N, c.topology.area_km, rng);
    if (!c.topology.require_connected) return positions;
    if (build_topology(positions, c.topology.link_radius_km).is_connected()) return positions;
  }
  throw ConfigError("topology: no connected placement found in " + std::to_string(c.topology.placement_attempts) +
                    " attempts; increase link_radius_km");
}

}  // namespace

Scenario build_scenario(const ScenarioConfig& config) {
  config.validate();
  const ScenarioConfig& c = config;
  Topology topology = build_topology(place_clients(c), c.topology.link_radius_km, c.topology.area_km);
  if (c.topology.require_connected && !topology.is_connected())
    throw ConfigError("topology: the client graph is disconnected");

  ChannelModel channel;
  if (c.channel.mode == ChannelMode::fixed) {
    channel = fixed_channel(c.channel.theta.size() == 1 ? std::vector<double>(c.N, c.channel.theta[0]) : c.channel.theta);
  } else {
    const Point server{c.topology.area_km / 2.0, c.topology.area_km / 2.0};
    channel = pathloss_channel(topology.positions(), server, c.channel.pathloss);
  }

  Scenario s{c, std::move(topology), std::move(channel), std::nullopt, {}, {}, std::nullopt, binomial(c.N, c.K)};

  if (c.reward_mode == RewardMode::oracle) {
    s.arm_means = ArmMeans::from_config(c);
    s.optimal_set = s.arm_means->best_set();
    if (s.num_arms <= c.arm_cap) s.gap_stats = gaps(s.arm_means->all(c.arm_cap));
  } else {
    std::vector<ClientId> iid = c.data.iid_clients;
    std::sort(iid.begin(), iid.end());
    iid.erase(std::unique(iid.begin(), iid.end()), iid.end());
    if (iid.size() >= c.K) s.optimal_set.assign(iid.begin(), iid.begin() + static_cast<std::ptrdiff_t>(c.K));
  }
  if (!c.baselines.optimal_set.empty()) s.optimal_set = normalize_client_set(c.baselines.optimal_set, c.N, c.K);

  if (!c.baselines.round_robin_sets.empty()) {
    for (const auto& set : c.baselines.round_robin_sets) s.round_robin_sets.push_back(normalize_client_set(set, c.N, c.K));
  } else {
    std::vector<ClientId> order(c.N);
    std::iota(order.begin(), order.end(), ClientId{0});
    Rng rng = make_rng(c.seed, 0, "round_robin");
    std::shuffle(order.begin(), order.end(), rng);
    s.round_robin_sets = cold_start_groups(order, c.K);
  }
  return s;
}

std::vector<double> EpisodeTrace::accuracy_curve() const {
  std::vector<double> v;
  v.reserve(slots.size());
  for (const auto& s : slots) v.push_back(s.accuracy);
  return v;
}

std::vector<double> EpisodeTrace::regret_curve() const {
  std::vector<double> v;
  v.reserve(slots.size());
  for (const auto& s : slots) v.push_back(s.regret);
  return v;
}

std::vector<double> EpisodeTrace::reward_curve() const {
  std::vector<double> v;
  v.reserve(slots.size());
  for (const auto& s : slots) v.push_back(s.reward);
  return v;
}

namespace {

// Uniform interface over the six selection policies.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::vector<ClientId> select(std::size_t t) = 0;
  virtual void observe(std::size_t, double, std::span<const double>) {}
  virtual std::size_t gossip_rounds() const { return 0; }
  virtual const BpSlotDiagnostics* bp() const { return nullptr; }
  virtual std::span<const ClientBanditState> clients() const { return {}; }
};

class QuickInitPolicy final : public Policy {
 public:
  explicit QuickInitPolicy(QuickInitUcb ucb) : ucb_(std::move(ucb)) {}
  std::vector<ClientId> select(std::size_t t) override { return ucb_.select(t); }
  void observe(std::size_t t, double reward, std::span<const double>) override { ucb_.observe(t, reward); }

 private:
  QuickInitUcb ucb_;
};

class ConventionalPolicy final : public Policy {
 public:
  explicit ConventionalPolicy(ConventionalUcb ucb) : ucb_(std::move(ucb)) {}
  std::vector<ClientId> select(std::size_t t) override { return ucb_.select(t); }
  void observe(std::size_t t, double reward, std::span<const double>) override { ucb_.observe(t, reward); }

 private:
  ConventionalUcb ucb_;
};

class BpUcbPolicy final : public Policy {
 public:
  BpUcbPolicy(BpUcbAgent agent, Rng rng) : agent_(std::move(agent)), rng_(rng) {}
  std::vector<ClientId> select(std::size_t t) override { return agent_.select(t, rng_); }
  void observe(std::size_t t, double, std::span<const double> opinions) override { agent_.observe(t, opinions); }
  std::size_t gossip_rounds() const override { return agent_.last_gossip_rounds(); }
  const BpSlotDiagnostics* bp() const override { return &agent_.last_bp(); }
  std::span<const ClientBanditState> clients() const override { return agent_.states(); }

 private:
  BpUcbAgent agent_;
  Rng rng_;
};

class RandomPolicy final : public Policy {
 public:
  RandomPolicy(RandomSelection sel, Rng rng) : sel_(sel), rng_(rng) {}
  std::vector<ClientId> select(std::size_t) override { return sel_.select(rng_); }

 private:
  RandomSelection sel_;
  Rng rng_;
};

class RoundRobinPolicy final : public Policy {
 public:
  explicit RoundRobinPolicy(RoundRobinSelection sel) : sel_(std::move(sel)) {}
  std::vector<ClientId> select(std::size_t t) override { return sel_.select(t); }

 private:
  RoundRobinSelection sel_;
};

class FixedPolicy final : public Policy {
 public:
  explicit FixedPolicy(FixedSelection sel) : sel_(std::move(sel)) {}
  std::vector<ClientId> select(std::size_t) override { return sel_.select(); }

 private:
  FixedSelection sel_;
};

std::unique_ptr<Policy> make_policy(const Scenario& s, Algorithm algorithm, std::uint64_t seed) {
  const ScenarioConfig& c = s.config;
  switch (algorithm) {
    case Algorithm::quick_init_ucb: {
      std::vector<std::vector<ClientId>> groups;
      if (c.grouping == Grouping::sequential) {
        groups = cold_start_groups(c.N, c.K);
      } else {
        std::vector<ClientId> order(c.N);
        std::iota(order.begin(), order.end(), ClientId{0});
        Rng rng = make_rng(seed, 0, "grouping");
        std::shuffle(order.begin(), order.end(), rng);
        groups = cold_start_groups(order, c.K);
      }
      return std::make_unique<QuickInitPolicy>(QuickInitUcb(c.N, c.K, c.mu, std::move(groups), c.arm_cap));
    }
    case Algorithm::bp_ucb:
      return std::make_unique<BpUcbPolicy>(BpUcbAgent(s.topology, c.K, c.mu_bp, c.bp.params()),
                                           make_rng(seed, 0, "select"));
    case Algorithm::random:
      return std::make_unique<RandomPolicy>(RandomSelection(c.N, c.K), make_rng(seed, 0, "select"));
    case Algorithm::round_robin:
      return std::make_unique<RoundRobinPolicy>(RoundRobinSelection(s.round_robin_sets));
    case Algorithm::conventional_ucb:
      return std::make_unique<ConventionalPolicy>(ConventionalUcb(c.N, c.K, c.mu, c.arm_cap));
    case Algorithm::oracle:
      if (s.optimal_set.empty()) throw ConfigError("oracle policy: no optimal set configured");
      return std::make_unique<FixedPolicy>(FixedSelection(s.optimal_set));
  }
  throw ConfigError("unknown algorithm");
}

}  // namespace

EpisodeTrace run_episode(const Scenario& s, Algorithm algorithm, std::uint64_t seed) {
  const ScenarioConfig& c = s.config;
  std::unique_ptr<Environment> env;
  if (c.reward_mode == RewardMode::oracle) {
    if (!s.arm_means) throw ConfigError("oracle reward mode without arm means");
    env = std::make_unique<OracleEnvironment>(*s.arm_means, c.oracle.distribution, c.oracle.concentration,
                                              make_rng(seed, 0, "opinions"));
  } else {
    Rng data_rng = make_rng(seed, 0, "data");
    auto partition = std::make_shared<const Partition>(make_partition(c, data_rng));
    env = std::make_unique<FederatedEnvironment>(partition, s.channel, c.training, c.L, seed);
  }
  auto policy = make_policy(s, algorithm, seed);
  const bool rankable = s.num_arms < std::numeric_limits<std::uint64_t>::max();

  EpisodeTrace trace;
  trace.algorithm = algorithm;
  trace.slots.reserve(c.T);
  trace.selection_counts.assign(c.N, 0);
  double regret = s.arm_means ? 0.0 : kNaN;
  for (std::size_t t = 1; t <= c.T; ++t) {
    SlotRecord rec;
    rec.slot = t;
    rec.selected = policy->select(t);
    const auto snapshot = policy->clients();
    rec.clients.assign(snapshot.begin(), snapshot.end());
    rec.opinions = env->play(t, rec.selected);
    rec.reward = average_opinion(rec.opinions);
    policy->observe(t, rec.reward, rec.opinions);
    if (s.arm_means) regret += std::max(0.0, s.arm_means->gap(rec.selected));
    rec.regret = regret;
    rec.accuracy = env->accuracy();
    if (rankable) rec.arm = arm_rank(rec.selected, c.N);
    rec.gossip_rounds = policy->gossip_rounds();
    rec.successful_uploads = env->successful_uploads();
    for (ClientId n : rec.selected) ++trace.selection_counts[n];
    if (const BpSlotDiagnostics* d = policy->bp()) trace.bp.push_back(*d);
    trace.slots.push_back(std::move(rec));
  }
  return trace;
}

std::optional<std::size_t> time_to_accuracy(std::span<const double> accuracy, double target) {
  if (!(target > 0.0 && target < 1.0)) throw DomainError("time_to_accuracy: target must lie in (0,1)");
  for (std::size_t i = 0; i < accuracy.size(); ++i)
    if (accuracy[i] >= target) return i + 1;
  return std::nullopt;
}

std::optional<std::size_t> time_to_accuracy(const EpisodeTrace& trace, double target) {
  return time_to_accuracy(trace.accuracy_curve(), target);
}

std::vector<double> selection_histogram(std::span<const EpisodeTrace> traces) {
  if (traces.empty()) throw DomainError("selection_histogram: no traces");
  std::vector<double> out(traces.front().selection_counts.size(), 0.0);
  for (const auto& tr : traces) {
    if (tr.selection_counts.size() != out.size()) throw DomainError("selection_histogram: client counts differ");
    for (std::size_t n = 0; n < out.size(); ++n) out[n] += static_cast<double>(tr.selection_counts[n]);
  }
  for (double& v : out) v /= static_cast<double>(traces.size());
  return out;
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t trial) noexcept {
  return derive_seed(master, trial, "trial");
}

std::optional<double> regret_bound(const Scenario& s, Algorithm algorithm, std::size_t t) {
  if (!s.gap_stats || !s.gap_stats->r_min) return std::nullopt;
  const GapStats& g = *s.gap_stats;
  switch (algorithm) {
    case Algorithm::quick_init_ucb:
    case Algorithm::conventional_ucb:
      return theorem1_bound(s.num_arms, *g.r_min, *g.r_max, t);
    case Algorithm::bp_ucb:
      return theorem3_bound(s.config.N, *g.r_min, *g.r_max, t);
    default:
      return std::nullopt;
  }
}

namespace {

struct TrialSummary {
  std::vector<double> accuracy, reward, regret;
  std::vector<std::size_t> counts;
  std::optional<std::size_t> tta;
  std::optional<EpisodeTrace> trace;
};

CurveStats curve_stats(const std::vector<TrialSummary>& trials, std::vector<double> TrialSummary::*field) {
  const std::size_t len = (trials.front().*field).size();
  CurveStats cs{std::vector<double>(len, 0.0), std::vector<double>(len, 0.0)};
  const double n = static_cast<double>(trials.size());
  for (const auto& tr : trials)
    for (std::size_t i = 0; i < len; ++i) cs.mean[i] += (tr.*field)[i];
  for (double& m : cs.mean) m /= n;
  for (const auto& tr : trials)
    for (std::size_t i = 0; i < len; ++i) {
      const double d = (tr.*field)[i] - cs.mean[i];
      cs.std[i] += d * d;
    }
  for (double& v : cs.std) v = std::sqrt(v / n);
  return cs;
}

}  // namespace

MetricsReport monte_carlo(const Scenario& s, Algorithm algorithm, const MonteCarloOptions& options) {
  if (options.trials < 1) throw ConfigError("monte_carlo: trials must be >= 1");
  const ScenarioConfig& c = s.config;
  std::vector<TrialSummary> results(options.trials);

  auto run_one = [&](std::size_t i) {
    EpisodeTrace tr = run_episode(s, algorithm, trial_seed(c.seed, i));
    if (options.on_trace) options.on_trace(i, tr);
    TrialSummary& r = results[i];
    r.accuracy = tr.accuracy_curve();
    r.reward = tr.reward_curve();
    r.regret = tr.regret_curve();
    r.counts = tr.selection_counts;
    if (c.reward_mode == RewardMode::federated) r.tta = time_to_accuracy(r.accuracy, c.target_accuracy);
    if (options.keep_traces) r.trace = std::move(tr);
  };

  std::size_t threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, options.trials);
  if (threads <= 1) {
    for (std::size_t i = 0; i < options.trials; ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < options.trials;) {
          try {
            run_one(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = options.trials;
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  MetricsReport rep;
  rep.algorithm = algorithm;
  rep.reward_mode = c.reward_mode;
  rep.trials = options.trials;
  rep.horizon = c.T;
  rep.target_accuracy = c.target_accuracy;
  rep.accuracy = curve_stats(results, &TrialSummary::accuracy);
  rep.reward = curve_stats(results, &TrialSummary::reward);
  rep.regret = curve_stats(results, &TrialSummary::regret);
  rep.bound.resize(c.T);
  for (std::size_t t = 1; t <= c.T; ++t) rep.bound[t - 1] = regret_bound(s, algorithm, t).value_or(kNaN);

  rep.selection_counts.assign(c.N, 0.0);
  for (const auto& r : results)
    for (std::size_t n = 0; n < c.N; ++n) rep.selection_counts[n] += static_cast<double>(r.counts[n]);
  for (double& v : rep.selection_counts) v /= static_cast<double>(options.trials);

  if (c.reward_mode == RewardMode::federated) {
    rep.tta_of_mean = time_to_accuracy(rep.accuracy.mean, c.target_accuracy);
    double sum = 0.0;
    for (const auto& r : results) {
      sum += static_cast<double>(r.tta.value_or(c.T));
      rep.tta_reached += r.tta ? 1 : 0;
    }
    rep.tta_mean = sum / static_cast<double>(options.trials);
    rep.final_accuracy_mean = rep.accuracy.mean.back();
    rep.final_accuracy_std = rep.accuracy.std.back();
  } else {
    rep.final_accuracy_mean = kNaN;
    rep.final_accuracy_std = kNaN;
  }
  if (options.keep_traces)
    for (auto& r : results) rep.traces.push_back(std::move(*r.trace));
  return rep;
}

}  // namespace fedsel
