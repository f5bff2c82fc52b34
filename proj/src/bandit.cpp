#include "fedsel/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "fedsel/error.hpp"
#include "fedsel/simd.hpp"

namespace fedsel {

std::uint64_t binomial(std::size_t n, std::size_t k) noexcept {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t c = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    // c * (n - k + i) / i stays integral at every step
    const std::uint64_t num = n - k + i;
    if (c > std::numeric_limits<std::uint64_t>::max() / num) return std::numeric_limits<std::uint64_t>::max();
    c = c * num / i;
  }
  return c;
}

std::vector<SuperArm> enumerate_arms(std::size_t n, std::size_t k, std::size_t cap) {
  if (k < 1 || k > n) throw ConfigError("enumerate_arms: need 1 <= K <= N");
  const std::uint64_t count = binomial(n, k);
  if (count > cap)
    throw ScalabilityError("enumerate_arms: C(" + std::to_string(n) + "," + std::to_string(k) + ") = " +
                           std::to_string(count) + " super arms exceeds the cap of " + std::to_string(cap) +
                           "; use bp_ucb for this scale");
  std::vector<SuperArm> arms;
  arms.reserve(count);
  std::vector<ClientId> c(k);
  std::iota(c.begin(), c.end(), ClientId{0});
  for (ArmId id = 0;; ++id) {
    arms.push_back(SuperArm{c, id});
    // advance to the next combination in lexicographic order
    std::size_t i = k;
    while (i > 0 && c[i - 1] == n - k + i - 1) --i;
    if (i == 0) break;
    ++c[i - 1];
    for (std::size_t j = i; j < k; ++j) c[j] = c[j - 1] + 1;
  }
  return arms;
}

ArmId arm_rank(std::span<const ClientId> members, std::size_t n) {
  const std::size_t k = members.size();
  if (k < 1 || k > n) throw DomainError("arm_rank: need 1 <= K <= N");
  ArmId rank = 0;
  std::size_t next = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (members[i] >= n || members[i] < next) throw DomainError("arm_rank: members must be increasing and < N");
    for (std::size_t v = next; v < members[i]; ++v) rank += binomial(n - 1 - v, k - 1 - i);
    next = members[i] + 1;
  }
  return rank;
}

std::vector<ClientId> arm_unrank(ArmId id, std::size_t n, std::size_t k) {
  if (k < 1 || k > n) throw DomainError("arm_unrank: need 1 <= K <= N");
  if (id >= binomial(n, k)) throw DomainError("arm_unrank: id out of range");
  std::vector<ClientId> out;
  out.reserve(k);
  ClientId v = 0;
  for (std::size_t i = 0; i < k; ++i) {
    for (;; ++v) {
      const std::uint64_t block = binomial(n - 1 - v, k - 1 - i);
      if (id < block) break;
      id -= block;
    }
    out.push_back(v++);
  }
  return out;
}

double ucb_index(const ArmState& state, std::size_t t, double mu) {
  if (state.pulls == 0) throw UninitializedArmError("ucb_index: arm has never been pulled");
  if (t < 1) throw DomainError("ucb_index: slot must be >= 1");
  return state.mean + mu * std::sqrt(std::log(static_cast<double>(t)) / static_cast<double>(state.pulls));
}

ArmState update_arm(const ArmState& state, double reward) {
  if (!(reward >= 0.0 && reward <= 1.0)) throw DomainError("update_arm: reward outside [0,1]");
  const double p = static_cast<double>(state.pulls);
  return ArmState{(p * state.mean + reward) / (p + 1.0), state.pulls + 1};
}

void ArmTable::set(ArmId a, const ArmState& s) {
  means_.at(a) = s.mean;
  pulls_.at(a) = s.pulls;
}

bool ArmTable::all_initialized() const noexcept {
  return std::none_of(pulls_.begin(), pulls_.end(), [](std::uint32_t p) { return p == 0; });
}

std::span<const double> ArmTable::indices(std::size_t t, double mu) const {
  if (t < 1) throw DomainError("ArmTable: slot must be >= 1");
  if (size() == 0) throw DomainError("ArmTable: no arms");
  if (!all_initialized()) throw UninitializedArmError("ArmTable: some arm has never been pulled");
  simd::ucb_indices(means_, pulls_, std::log(static_cast<double>(t)), mu, scratch_);
  return scratch_;
}

ArmId ArmTable::select(std::size_t t, double mu) const { return simd::argmax(indices(t, mu)); }

ArmId select_arm(const ArmTable& table, std::size_t t, double mu) { return table.select(t, mu); }

std::vector<std::vector<ClientId>> cold_start_groups(std::span<const ClientId> order, std::size_t k) {
  const std::size_t n = order.size();
  if (k < 1 || k > n) throw GroupingError("cold_start_groups: need 1 <= K <= N");
  std::vector<std::vector<ClientId>> groups;
  for (std::size_t start = 0; start < n; start += k) {
    std::vector<ClientId> g(order.begin() + static_cast<std::ptrdiff_t>(start),
                            order.begin() + static_cast<std::ptrdiff_t>(std::min(n, start + k)));
    std::sort(g.begin(), g.end());
    if (g.size() < k) {
      std::vector<ClientId> pool(order.begin(), order.end());
      std::sort(pool.begin(), pool.end());
      for (ClientId c : pool) {
        if (g.size() == k) break;
        if (!std::binary_search(g.begin(), g.end(), c)) {
          g.push_back(c);
          std::sort(g.begin(), g.end());
        }
      }
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

std::vector<std::vector<ClientId>> cold_start_groups(std::size_t n, std::size_t k) {
  std::vector<ClientId> order(n);
  std::iota(order.begin(), order.end(), ClientId{0});
  return cold_start_groups(order, k);
}

ArmTable quick_init(std::span<const std::vector<ClientId>> groups, std::span<const double> group_rewards,
                    std::span<const SuperArm> arms, std::size_t n, std::size_t k) {
  if (groups.empty()) throw GroupingError("quick_init: no groups");
  if (groups.size() != group_rewards.size()) throw GroupingError("quick_init: one reward per group required");

  // group_of[c] lists every group holding client c (padding can repeat a client).
  std::vector<std::vector<std::size_t>> group_of(n);
  std::size_t short_groups = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].empty() || groups[g].size() > k) throw GroupingError("quick_init: group size must be K");
    if (groups[g].size() < k) ++short_groups;
    for (ClientId c : groups[g]) {
      if (c >= n) throw GroupingError("quick_init: client id out of range");
      if (!group_of[c].empty() && group_of[c].back() == g) throw GroupingError("quick_init: duplicate client in group");
      group_of[c].push_back(g);
    }
    if (!(group_rewards[g] >= 0.0 && group_rewards[g] <= 1.0)) throw DomainError("quick_init: reward outside [0,1]");
  }
  if (short_groups > 1) throw GroupingError("quick_init: at most one remainder group may be smaller than K");
  for (ClientId c = 0; c < n; ++c)
    if (group_of[c].empty()) throw GroupingError("quick_init: client " + std::to_string(c) + " is in no group");

  ArmTable table(arms.size());
  std::vector<std::size_t> overlap(groups.size());
  for (const SuperArm& arm : arms) {
    std::fill(overlap.begin(), overlap.end(), std::size_t{0});
    for (ClientId c : arm.members)
      for (std::size_t g : group_of.at(c)) ++overlap[g];
    double num = 0.0;
    double den = 0.0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      num += static_cast<double>(overlap[g]) * group_rewards[g];
      den += static_cast<double>(overlap[g]);
    }
    table.set(arm.id, ArmState{std::clamp(num / den, 0.0, 1.0), 1});
  }
  return table;
}

GapStats gaps(std::span<const double> arm_means) {
  if (arm_means.empty()) throw DomainError("gaps: no arms");
  GapStats s;
  s.best = simd::argmax(arm_means);
  s.opt_r = arm_means[s.best];
  s.delta.resize(arm_means.size());
  double worst_bad = std::numeric_limits<double>::infinity();
  double best_bad = -std::numeric_limits<double>::infinity();
  for (ArmId a = 0; a < arm_means.size(); ++a) {
    s.delta[a] = s.opt_r - arm_means[a];
    if (arm_means[a] < s.opt_r) {
      s.bad_set.push_back(a);
      worst_bad = std::min(worst_bad, arm_means[a]);
      best_bad = std::max(best_bad, arm_means[a]);
    }
  }
  if (!s.bad_set.empty()) {
    s.r_min = s.opt_r - best_bad;
    s.r_max = s.opt_r - worst_bad;
  }
  return s;
}

std::vector<double> pseudo_regret(std::span<const ArmId> history, std::span<const double> arm_means) {
  const GapStats g = gaps(arm_means);
  std::vector<double> out;
  out.reserve(history.size());
  double reg = 0.0;
  for (ArmId a : history) {
    if (a >= arm_means.size()) throw DomainError("pseudo_regret: unknown arm " + std::to_string(a));
    reg += g.delta[a];
    out.push_back(reg);
  }
  return out;
}

double theorem1_bound(std::size_t num_arms, double r_min, double r_max, std::size_t horizon) {
  if (!(r_min > 0.0)) throw UndefinedGapError("theorem1_bound: R_min must be positive");
  if (horizon < 1) throw DomainError("theorem1_bound: T must be >= 1");
  const double a = static_cast<double>(num_arms);
  return 8.0 * a * std::log(static_cast<double>(horizon)) / r_min + (std::numbers::pi * std::numbers::pi / 3.0 + 1.0) * a * r_max;
}

std::vector<ClientId> normalize_client_set(std::vector<ClientId> set, std::size_t n, std::size_t k) {
  std::sort(set.begin(), set.end());
  if (set.size() != k) throw ConfigError("client set must hold exactly K clients");
  if (std::adjacent_find(set.begin(), set.end()) != set.end()) throw ConfigError("client set has duplicates");
  if (!set.empty() && set.back() >= n) throw ConfigError("client set references a client id >= N");
  return set;
}

// ---------------------------------------------------------------------------

QuickInitUcb::QuickInitUcb(std::size_t n, std::size_t k, double mu, std::vector<std::vector<ClientId>> groups,
                           std::size_t cap)
    : n_(n), k_(k), mu_(mu), groups_(std::move(groups)), arms_(enumerate_arms(n, k, cap)) {
  if (!(mu >= 0.0)) throw ConfigError("QuickInitUcb: mu must be >= 0");
  if (groups_.empty()) throw GroupingError("QuickInitUcb: no cold-start groups");
  for (auto& g : groups_) std::sort(g.begin(), g.end());
}

std::vector<ClientId> QuickInitUcb::select(std::size_t t) {
  if (t < 1) throw DomainError("QuickInitUcb: slot must be >= 1");
  if (t <= groups_.size()) {
    if (t != group_rewards_.size() + 1) throw DomainError("QuickInitUcb: cold-start slots must be played in order");
    const auto& g = groups_[t - 1];
    last_arm_ = g.size() == k_ ? arm_rank(g, n_) : 0;
    return g;
  }
  if (!initialized_) throw UninitializedArmError("QuickInitUcb: cold start incomplete");
  last_arm_ = table_.select(t, mu_);
  return arms_[last_arm_].members;
}

void QuickInitUcb::observe(std::size_t t, double reward) {
  if (t <= groups_.size()) {
    if (!(reward >= 0.0 && reward <= 1.0)) throw DomainError("QuickInitUcb: reward outside [0,1]");
    group_rewards_.push_back(reward);
    if (group_rewards_.size() == groups_.size()) {
      table_ = quick_init(groups_, group_rewards_, arms_, n_, k_);
      initialized_ = true;
    }
    return;
  }
  table_.update(last_arm_, reward);
}

ConventionalUcb::ConventionalUcb(std::size_t n, std::size_t k, double mu, std::size_t cap)
    : mu_(mu), arms_(enumerate_arms(n, k, cap)), table_(arms_.size()) {
  if (!(mu >= 0.0)) throw ConfigError("ConventionalUcb: mu must be >= 0");
}

std::vector<ClientId> ConventionalUcb::select(std::size_t t) {
  if (t < 1) throw DomainError("ConventionalUcb: slot must be >= 1");
  last_arm_ = t <= arms_.size() ? t - 1 : table_.select(t, mu_);
  return arms_[last_arm_].members;
}

void ConventionalUcb::observe(std::size_t, double reward) { table_.update(last_arm_, reward); }

RandomSelection::RandomSelection(std::size_t n, std::size_t k) : n_(n), k_(k) {
  if (k < 1 || k > n) throw ConfigError("RandomSelection: need 1 <= K <= N");
}

std::vector<ClientId> RandomSelection::select(Rng& rng) const {
  // partial Fisher-Yates: every K-subset is equally likely
  std::vector<ClientId> pool(n_);
  std::iota(pool.begin(), pool.end(), ClientId{0});
  for (std::size_t i = 0; i < k_; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n_ - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(k_);
  std::sort(pool.begin(), pool.end());
  return pool;
}

RoundRobinSelection::RoundRobinSelection(std::vector<std::vector<ClientId>> sets) : sets_(std::move(sets)) {
  if (sets_.empty()) throw ConfigError("round_robin: empty set list");
  for (auto& s : sets_) std::sort(s.begin(), s.end());
}

const std::vector<ClientId>& RoundRobinSelection::select(std::size_t t) const {
  if (t < 1) throw DomainError("round_robin: slot must be >= 1");
  return sets_[(t - 1) % sets_.size()];
}

FixedSelection::FixedSelection(std::vector<ClientId> set) : set_(std::move(set)) {
  if (set_.empty()) throw ConfigError("oracle: empty client set");
  std::sort(set_.begin(), set_.end());
}

}  // namespace fedsel
