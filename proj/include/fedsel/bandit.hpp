#pragma once

// Super-arm bandit machinery for centralized client selection: arm enumeration,
// UCB indices, Quick-Init UCB, the selection baselines, gap statistics,
// pseudo-regret and the logarithmic regret bound.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fedsel/domain.hpp"
#include "fedsel/rng.hpp"

namespace fedsel {

using ArmId = std::size_t;

inline constexpr std::size_t kDefaultArmCap = 200000;

struct SuperArm {
  std::vector<ClientId> members;  // strictly increasing, size K
  ArmId id = 0;
};

struct ArmState {
  double mean = 0.0;
  std::uint32_t pulls = 0;
};

// C(n, k), saturating at UINT64_MAX.
std::uint64_t binomial(std::size_t n, std::size_t k) noexcept;

// All K-subsets of {0..N-1} in lexicographic order; ids equal positions.
// Throws ConfigError for K outside [1, N] and ScalabilityError above `cap` arms.
std::vector<SuperArm> enumerate_arms(std::size_t n, std::size_t k, std::size_t cap = kDefaultArmCap);

// Lexicographic rank of a sorted K-subset, consistent with enumerate_arms.
ArmId arm_rank(std::span<const ClientId> members, std::size_t n);
std::vector<ClientId> arm_unrank(ArmId id, std::size_t n, std::size_t k);

// mean + mu sqrt(ln t / pulls). Throws UninitializedArmError when pulls == 0.
double ucb_index(const ArmState& state, std::size_t t, double mu);

// Pull count and running mean r' = (P r + x) / (P + 1). Throws DomainError unless reward in [0,1].
ArmState update_arm(const ArmState& state, double reward);

// Structure-of-arrays arm table so index scans run through the SIMD kernels.
class ArmTable {
 public:
  ArmTable() = default;
  explicit ArmTable(std::size_t arms) : means_(arms, 0.0), pulls_(arms, 0), scratch_(arms, 0.0) {}

  std::size_t size() const noexcept { return means_.size(); }
  ArmState state(ArmId a) const { return {means_.at(a), pulls_.at(a)}; }
  void set(ArmId a, const ArmState& s);
  void update(ArmId a, double reward) { set(a, update_arm(state(a), reward)); }
  std::span<const double> means() const noexcept { return means_; }
  std::span<const std::uint32_t> pulls() const noexcept { return pulls_; }
  bool all_initialized() const noexcept;

  // Argmax of the UCB index at slot t, lowest id on ties. Throws UninitializedArmError
  // if any arm has never been pulled.
  ArmId select(std::size_t t, double mu) const;
  // UCB index of every arm (same arithmetic as ucb_index).
  std::span<const double> indices(std::size_t t, double mu) const;

 private:
  std::vector<double> means_;
  std::vector<std::uint32_t> pulls_;
  mutable std::vector<double> scratch_;
};

// Argmax of ucb_index over the table, ties to the lowest id.
ArmId select_arm(const ArmTable& table, std::size_t t, double mu);

// ceil(N/K) disjoint groups of K clients taken in id order; when K does not divide N the
// last group holds the leftovers padded with the lowest-id clients not already in it.
std::vector<std::vector<ClientId>> cold_start_groups(std::size_t n, std::size_t k);
// Same layout over an arbitrary client order (e.g. a seeded shuffle).
std::vector<std::vector<ClientId>> cold_start_groups(std::span<const ClientId> order, std::size_t k);

// Initializes every arm from the cold-start rewards: an arm's mean is the average of the
// group rewards weighted by |arm ∩ group|, and every arm gets one pull.
// Throws GroupingError unless the groups cover all clients and have size K (one smaller
// remainder group is allowed), and DomainError for rewards outside [0,1].
ArmTable quick_init(std::span<const std::vector<ClientId>> groups, std::span<const double> group_rewards,
                    std::span<const SuperArm> arms, std::size_t n, std::size_t k);

struct GapStats {
  ArmId best = 0;
  double opt_r = 0.0;
  std::vector<ArmId> bad_set;  // arms strictly below opt_r
  std::optional<double> r_min;  // nullopt when bad_set is empty
  std::optional<double> r_max;
  std::vector<double> delta;  // opt_r - mean, per arm
};

GapStats gaps(std::span<const double> arm_means);

// Reg(t) = sum_{s<=t} Delta_{a(s)} for every prefix of the history.
std::vector<double> pseudo_regret(std::span<const ArmId> history, std::span<const double> arm_means);

// 8 |A| ln T / R_min + (pi^2/3 + 1) |A| R_max. Throws UndefinedGapError for R_min <= 0.
double theorem1_bound(std::size_t num_arms, double r_min, double r_max, std::size_t horizon);

// ---------------------------------------------------------------------------
// Selection policies over K-subsets. Slots are 1-based. select() returns a sorted
// member list; observe() feeds back the scalar reward of the set just played.

class QuickInitUcb {
 public:
  QuickInitUcb(std::size_t n, std::size_t k, double mu, std::vector<std::vector<ClientId>> groups,
               std::size_t cap = kDefaultArmCap);

  std::size_t init_slots() const noexcept { return groups_.size(); }
  std::vector<ClientId> select(std::size_t t);
  void observe(std::size_t t, double reward);

  bool initialized() const noexcept { return initialized_; }
  const ArmTable& table() const noexcept { return table_; }
  std::span<const SuperArm> arms() const noexcept { return arms_; }
  ArmId last_arm() const noexcept { return last_arm_; }

 private:
  std::size_t n_, k_;
  double mu_;
  std::vector<std::vector<ClientId>> groups_;
  std::vector<SuperArm> arms_;
  std::vector<double> group_rewards_;
  ArmTable table_;
  bool initialized_ = false;
  ArmId last_arm_ = 0;
};

// UCB over the super arms without the cold start: each of the |A| arms is played once first.
class ConventionalUcb {
 public:
  ConventionalUcb(std::size_t n, std::size_t k, double mu, std::size_t cap = kDefaultArmCap);

  std::size_t init_slots() const noexcept { return arms_.size(); }
  std::vector<ClientId> select(std::size_t t);
  void observe(std::size_t t, double reward);
  const ArmTable& table() const noexcept { return table_; }

 private:
  double mu_;
  std::vector<SuperArm> arms_;
  ArmTable table_;
  ArmId last_arm_ = 0;
};

// Uniform over all K-subsets.
class RandomSelection {
 public:
  RandomSelection(std::size_t n, std::size_t k);
  std::vector<ClientId> select(Rng& rng) const;

 private:
  std::size_t n_, k_;
};

// Cycles through a fixed list of sets. Throws ConfigError for an empty list.
class RoundRobinSelection {
 public:
  explicit RoundRobinSelection(std::vector<std::vector<ClientId>> sets);
  const std::vector<ClientId>& select(std::size_t t) const;
  std::size_t cycle() const noexcept { return sets_.size(); }

 private:
  std::vector<std::vector<ClientId>> sets_;
};

// Always plays the same set.
class FixedSelection {
 public:
  explicit FixedSelection(std::vector<ClientId> set);
  const std::vector<ClientId>& select() const noexcept { return set_; }

 private:
  std::vector<ClientId> set_;
};

// Sorted, duplicate-free, in range, size K; throws ConfigError otherwise.
std::vector<ClientId> normalize_client_set(std::vector<ClientId> set, std::size_t n, std::size_t k);

}  // namespace fedsel
