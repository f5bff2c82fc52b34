#pragma once

// Sum-product belief propagation over the client graph, with binary client
// states (1 = should participate). Messages live on directed edges and carry one
// value per receiver state.
//
// Two potential families share the machinery:
//   separable: phi_n(s) = r_n^2 and psi(d) = exp(-C d^beta), both state-independent.
//          Normalized messages are then uniform and b_n(1) is proportional to
//          r_n^2 * 2^-deg(n).
//   ising: phi_n(1) = r_n^2, phi_n(0) = (1 - r_n)^2 and psi = exp(J s_i s_n) with
//          J = -C d^beta, s = 2*state - 1. State-dependent, so messages carry
//          information; used to exercise the contraction certificate.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "fedsel/domain.hpp"
#include "fedsel/rng.hpp"

namespace fedsel {

enum class Potentials { separable, ising };

struct BpParams {
  double c_linear = 0.001;  // -30 dB
  double beta = 3.7;
  double tol = 1e-9;
  std::size_t max_iter = 1000;
  double damping = 0.0;  // m <- (1 - damping) m_new + damping m_old
  Potentials potentials = Potentials::separable;

  static double db_to_linear(double db) noexcept;
  // Throws ConfigError for C <= 0, beta <= 0, tol <= 0, max_iter == 0 or damping outside [0,1).
  void validate() const;
};

// r^2. Throws DomainError for r outside [0,1].
double local_fn(double r);
// exp(-C d^beta). Throws DomainError for d < 0.
double compatibility(double d_km, const BpParams& params);

// phi_n(state) under the configured family.
double local_potential(double r, int state, const BpParams& params);
// psi(state_i, state_n) for an edge of length d.
double pair_potential(double d_km, int state_i, int state_n, const BpParams& params);

struct ContractionCertificate {
  bool satisfied = true;
  double lambda = 0.0;        // (N-1) tanh(d_max^beta)
  double lambda_scaled = 0.0; // (N-1) tanh(C d_max^beta), diagnostic only
};

// lambda = (N-1) tanh(d_max^beta), satisfied iff lambda < 1. N < 2 gives lambda = 0.
ContractionCertificate check_contraction(std::size_t n, double d_max_km, double beta, double c_linear = 1.0);

// Directed edges of a topology in (source, target) order, with reverse-edge lookup.
struct DirectedEdges {
  std::vector<ClientId> source;
  std::vector<ClientId> target;
  std::vector<std::size_t> reverse;
  std::vector<std::vector<std::size_t>> incoming;  // edge ids whose target is n
  std::vector<double> length_km;

  explicit DirectedEdges(const Topology& topology);
  std::size_t size() const noexcept { return source.size(); }
};

using Message = std::array<double, 2>;  // indexed by receiver state

struct BeliefState {
  std::vector<Message> messages;            // aligned with DirectedEdges
  std::vector<std::array<double, 2>> beliefs;  // globally normalized: sum_n beliefs[n][1] = 1
  double residual = 0.0;
  double initial_residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> residual_history;
  ContractionCertificate certificate;

  std::vector<double> participation() const;  // beliefs[n][1]
};

// Uniform (0.5, 0.5) messages, or random normalized messages when `rng` is given.
std::vector<Message> initial_messages(const DirectedEdges& edges, Rng* rng = nullptr);

// One synchronous sweep over every directed edge, followed by per-edge normalization and
// damping. Returns the max absolute change. An edge whose raw message sums to zero is reset
// to uniform. Throws NumericError on non-finite products.
double message_sweep(std::vector<Message>& messages, const DirectedEdges& edges, std::span<const double> opinions,
                     const BpParams& params);

// b_n(s) = phi_n(s) prod_{i -> n} m_{i,n}(s), scaled by one global factor so that
// sum_n b_n(1) = 1. Throws DegenerateBeliefError when every b_n(1) is zero.
std::vector<std::array<double, 2>> beliefs(std::span<const Message> messages, const DirectedEdges& edges,
                                           std::span<const double> opinions, const BpParams& params);

// Sweeps until the residual drops below tol or max_iter is reached; never throws on
// non-convergence. `start`, if given, replaces the uniform initial messages.
BeliefState run_bp(std::span<const double> opinions, const Topology& topology, const BpParams& params,
                   std::optional<std::vector<Message>> start = std::nullopt);

}  // namespace fedsel
