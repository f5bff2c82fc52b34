#pragma once

// Decentralized BP-UCB: per-client indices, flooding agreement on their ranking,
// top-K activation and the client-level regret bound.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fedsel/beliefprop.hpp"
#include "fedsel/domain.hpp"
#include "fedsel/rng.hpp"

namespace fedsel {

// mean + belief / N + mu sqrt(ln t / pulls). Throws UninitializedArmError for pulls == 0.
double bpucb_index(double mean, double belief, std::uint32_t pulls, std::size_t t, double mu, std::size_t n);

// One client's view of the (id, index) pairs it has heard about.
struct RankTable {
  std::vector<double> index;        // by client id, meaningful where known[id] != 0
  std::vector<std::uint8_t> known;

  explicit RankTable(std::size_t n = 0) : index(n, 0.0), known(n, 0) {}
  bool complete() const noexcept;
  // Ids by descending index, ties to the lowest id. Throws AgreementError when incomplete.
  std::vector<ClientId> ranking() const;
  bool operator==(const RankTable&) const = default;
};

struct GossipResult {
  std::vector<RankTable> tables;  // one per client
  std::size_t rounds = 0;         // synchronous rounds until every table was complete
};

// Synchronous flooding: each round every client sends all pairs it knows to its
// neighbors. Stops once every table is complete, which takes exactly the graph diameter.
// Throws AgreementError on a disconnected topology.
GossipResult gossip_rank(const Topology& topology, std::span<const double> local_indices);

// The K highest-ranked clients, returned in increasing id order.
// Throws AgreementError for an incomplete table and ConfigError for K outside [1, N].
std::vector<ClientId> select_topk(const RankTable& table, std::size_t k);

// 8 N R_max ln T / R_min^2 + (pi^2/3 + 1) N R_max. Throws UndefinedGapError for R_min <= 0.
double theorem3_bound(std::size_t n, double r_min, double r_max, std::size_t horizon);

struct ClientBanditState {
  double mean = 0.0;
  std::uint32_t pulls = 0;
  double belief = 0.0;
  double index = 0.0;
};

struct BpUcbStep {
  std::vector<ClientId> selected;
  std::size_t gossip_rounds = 0;
};

// Opinions r_{t,n} of all N clients about the model trained by `selected`.
using OpinionOracle = std::function<std::vector<double>(std::span<const ClientId> selected)>;

// One slot t >= 2: compute every index from `states` (beliefs already set), agree on the
// ranking by gossip, activate the top K, obtain opinions and fold each selected client's own
// opinion into its mean. Unselected clients are left untouched. Returns the opinions as well.
BpUcbStep bpucb_step(std::vector<ClientBanditState>& states, const Topology& topology, std::size_t t, double mu,
                     std::size_t k, const OpinionOracle& opinions, std::vector<double>* observed = nullptr);

struct BpSlotDiagnostics {
  std::size_t slot = 0;
  std::size_t iterations = 0;
  double residual = 0.0;
  bool converged = false;
  bool degenerate = false;  // every opinion was zero; beliefs fell back to 1/N
  double lambda = 0.0;
  double lambda_scaled = 0.0;
};

// Stateful BP-UCB driver. Slot 1 trains a uniformly random K-set and every client is
// initialized from its own opinion of the result (pulls = 1). From slot 2 on, indices use
// the beliefs computed from the previous slot's opinions.
class BpUcbAgent {
 public:
  BpUcbAgent(const Topology& topology, std::size_t k, double mu, BpParams bp);

  std::vector<ClientId> select(std::size_t t, Rng& rng);
  void observe(std::size_t t, std::span<const double> opinions);

  std::span<const ClientBanditState> states() const noexcept { return states_; }
  const BpSlotDiagnostics& last_bp() const noexcept { return diag_; }
  std::size_t last_gossip_rounds() const noexcept { return gossip_rounds_; }
  // Belief term b/N and exploration bonus of client n at slot t, for tracing.
  double belief_term(ClientId n) const;
  double bonus(ClientId n, std::size_t t) const;

 private:
  void refresh_beliefs(std::size_t t, std::span<const double> opinions);

  const Topology* topology_;
  std::size_t k_;
  double mu_;
  BpParams bp_;
  std::vector<ClientBanditState> states_;
  std::vector<ClientId> selected_;
  BpSlotDiagnostics diag_;
  std::size_t gossip_rounds_ = 0;
};

}  // namespace fedsel
