#include "fedsel/gossip.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "fedsel/bandit.hpp"
#include "fedsel/error.hpp"

namespace fedsel {

double bpucb_index(double mean, double belief, std::uint32_t pulls, std::size_t t, double mu, std::size_t n) {
  if (pulls == 0) throw UninitializedArmError("bpucb_index: client has never been selected");
  if (t < 1) throw DomainError("bpucb_index: slot must be >= 1");
  if (n < 1) throw DomainError("bpucb_index: N must be >= 1");
  if (!(belief >= 0.0)) throw DomainError("bpucb_index: negative belief");
  return mean + belief / static_cast<double>(n) +
         mu * std::sqrt(std::log(static_cast<double>(t)) / static_cast<double>(pulls));
}

bool RankTable::complete() const noexcept {
  return std::all_of(known.begin(), known.end(), [](std::uint8_t k) { return k != 0; });
}

std::vector<ClientId> RankTable::ranking() const {
  if (!complete()) throw AgreementError("ranking: table is incomplete");
  std::vector<ClientId> order(index.size());
  std::iota(order.begin(), order.end(), ClientId{0});
  std::stable_sort(order.begin(), order.end(), [this](ClientId a, ClientId b) { return index[a] > index[b]; });
  return order;
}

GossipResult gossip_rank(const Topology& topology, std::span<const double> local_indices) {
  const std::size_t n = topology.size();
  if (local_indices.size() != n) throw DomainError("gossip_rank: one index per client required");
  if (!topology.is_connected()) throw AgreementError("gossip_rank: topology is disconnected");

  GossipResult result;
  result.tables.assign(n, RankTable(n));
  for (ClientId c = 0; c < n; ++c) {
    result.tables[c].index[c] = local_indices[c];
    result.tables[c].known[c] = 1;
  }
  auto all_complete = [&] {
    return std::all_of(result.tables.begin(), result.tables.end(), [](const RankTable& t) { return t.complete(); });
  };
  while (!all_complete()) {
    // synchronous round: receivers only see what senders knew at the start of the round
    const std::vector<RankTable> before = result.tables;
    for (ClientId c = 0; c < n; ++c) {
      RankTable& mine = result.tables[c];
      for (ClientId nb : topology.neighbors(c)) {
        const RankTable& theirs = before[nb];
        for (ClientId id = 0; id < n; ++id) {
          if (theirs.known[id] && !mine.known[id]) {
            mine.known[id] = 1;
            mine.index[id] = theirs.index[id];
          }
        }
      }
    }
    ++result.rounds;
  }
  return result;
}

std::vector<ClientId> select_topk(const RankTable& table, std::size_t k) {
  const std::vector<ClientId> order = table.ranking();
  if (k < 1 || k > order.size()) throw ConfigError("select_topk: need 1 <= K <= N");
  std::vector<ClientId> top(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(top.begin(), top.end());
  return top;
}

double theorem3_bound(std::size_t n, double r_min, double r_max, std::size_t horizon) {
  if (!(r_min > 0.0)) throw UndefinedGapError("theorem3_bound: R_min must be positive");
  if (horizon < 1) throw DomainError("theorem3_bound: T must be >= 1");
  const double nn = static_cast<double>(n);
  return 8.0 * nn * r_max * std::log(static_cast<double>(horizon)) / (r_min * r_min) +
         (std::numbers::pi * std::numbers::pi / 3.0 + 1.0) * nn * r_max;
}

BpUcbStep bpucb_step(std::vector<ClientBanditState>& states, const Topology& topology, std::size_t t, double mu,
                     std::size_t k, const OpinionOracle& opinions, std::vector<double>* observed) {
  const std::size_t n = states.size();
  if (n != topology.size()) throw DomainError("bpucb_step: one state per client required");
  if (t < 2) throw DomainError("bpucb_step: slot 1 is the initialization slot");
  std::vector<double> idx(n);
  for (ClientId c = 0; c < n; ++c) {
    states[c].index = bpucb_index(states[c].mean, states[c].belief, states[c].pulls, t, mu, n);
    idx[c] = states[c].index;
  }
  const GossipResult g = gossip_rank(topology, idx);
  BpUcbStep step{select_topk(g.tables.front(), k), g.rounds};

  std::vector<double> r = opinions(step.selected);
  if (r.size() != n) throw DomainError("bpucb_step: opinion oracle must return N values");
  for (ClientId c : step.selected) {
    const ArmState next = update_arm(ArmState{states[c].mean, states[c].pulls}, r[c]);
    states[c].mean = next.mean;
    states[c].pulls = next.pulls;
  }
  if (observed != nullptr) *observed = std::move(r);
  return step;
}

BpUcbAgent::BpUcbAgent(const Topology& topology, std::size_t k, double mu, BpParams bp)
    : topology_(&topology), k_(k), mu_(mu), bp_(bp), states_(topology.size()) {
  if (k < 1 || k > topology.size()) throw ConfigError("bp_ucb: need 1 <= K <= N");
  if (!(mu >= 0.0)) throw ConfigError("bp_ucb: mu must be >= 0");
  bp_.validate();
  if (!topology.is_connected()) throw AgreementError("bp_ucb: topology is disconnected");
}

std::vector<ClientId> BpUcbAgent::select(std::size_t t, Rng& rng) {
  if (t < 1) throw DomainError("bp_ucb: slot must be >= 1");
  if (t == 1) {
    selected_ = RandomSelection(states_.size(), k_).select(rng);
    gossip_rounds_ = 0;
    return selected_;
  }
  const std::size_t n = states_.size();
  std::vector<double> idx(n);
  for (ClientId c = 0; c < n; ++c) {
    states_[c].index = bpucb_index(states_[c].mean, states_[c].belief, states_[c].pulls, t, mu_, n);
    idx[c] = states_[c].index;
  }
  const GossipResult g = gossip_rank(*topology_, idx);
  gossip_rounds_ = g.rounds;
  selected_ = select_topk(g.tables.front(), k_);
  return selected_;
}

void BpUcbAgent::observe(std::size_t t, std::span<const double> opinions) {
  if (opinions.size() != states_.size()) throw DomainError("bp_ucb: one opinion per client required");
  if (t == 1) {
    for (ClientId c = 0; c < states_.size(); ++c) {
      if (!(opinions[c] >= 0.0 && opinions[c] <= 1.0)) throw DomainError("bp_ucb: opinion outside [0,1]");
      states_[c].mean = opinions[c];
      states_[c].pulls = 1;
    }
  } else {
    for (ClientId c : selected_) {
      const ArmState next = update_arm(ArmState{states_[c].mean, states_[c].pulls}, opinions[c]);
      states_[c].mean = next.mean;
      states_[c].pulls = next.pulls;
    }
  }
  refresh_beliefs(t, opinions);
}

void BpUcbAgent::refresh_beliefs(std::size_t t, std::span<const double> opinions) {
  diag_ = BpSlotDiagnostics{};
  diag_.slot = t;
  const std::size_t n = states_.size();
  try {
    const BeliefState bs = run_bp(opinions, *topology_, bp_);
    diag_.iterations = bs.iterations;
    diag_.residual = bs.residual;
    diag_.converged = bs.converged;
    diag_.lambda = bs.certificate.lambda;
    diag_.lambda_scaled = bs.certificate.lambda_scaled;
    for (ClientId c = 0; c < n; ++c) states_[c].belief = bs.beliefs[c][1];
  } catch (const DegenerateBeliefError&) {
    diag_.degenerate = true;
    for (auto& s : states_) s.belief = 1.0 / static_cast<double>(n);
  }
}

double BpUcbAgent::belief_term(ClientId n) const {
  return states_.at(n).belief / static_cast<double>(states_.size());
}

double BpUcbAgent::bonus(ClientId n, std::size_t t) const {
  const auto& s = states_.at(n);
  if (s.pulls == 0 || t < 1) return 0.0;
  return mu_ * std::sqrt(std::log(static_cast<double>(t)) / static_cast<double>(s.pulls));
}

}  // namespace fedsel
