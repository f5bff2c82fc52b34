#include "fedsel/beliefprop.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fedsel/error.hpp"

namespace fedsel {

double BpParams::db_to_linear(double db) noexcept { return std::pow(10.0, db / 10.0); }

void BpParams::validate() const {
  if (!(c_linear > 0.0)) throw ConfigError("bp: C must be positive on the linear scale");
  if (!(beta > 0.0)) throw ConfigError("bp: beta must be positive");
  if (!(tol > 0.0)) throw ConfigError("bp: tol must be positive");
  if (max_iter < 1) throw ConfigError("bp: max_iter must be >= 1");
  if (!(damping >= 0.0 && damping < 1.0)) throw ConfigError("bp: damping must lie in [0,1)");
}

double local_fn(double r) {
  if (!(r >= 0.0 && r <= 1.0)) throw DomainError("local_fn: opinion outside [0,1]");
  return r * r;
}

double compatibility(double d_km, const BpParams& params) {
  if (!(d_km >= 0.0)) throw DomainError("compatibility: negative distance");
  return std::exp(-params.c_linear * std::pow(d_km, params.beta));
}

double local_potential(double r, int state, const BpParams& params) {
  const double phi = local_fn(r);
  if (params.potentials == Potentials::separable || state == 1) return phi;
  return (1.0 - r) * (1.0 - r);
}

double pair_potential(double d_km, int state_i, int state_n, const BpParams& params) {
  if (params.potentials == Potentials::separable) return compatibility(d_km, params);
  if (!(d_km >= 0.0)) throw DomainError("pair_potential: negative distance");
  const double coupling = -params.c_linear * std::pow(d_km, params.beta);
  const double spin = static_cast<double>((2 * state_i - 1) * (2 * state_n - 1));
  return std::exp(coupling * spin);
}

ContractionCertificate check_contraction(std::size_t n, double d_max_km, double beta, double c_linear) {
  if (!(d_max_km >= 0.0)) throw DomainError("check_contraction: negative d_max");
  ContractionCertificate c;
  if (n < 2) return c;
  const double dp = std::pow(d_max_km, beta);
  const double m = static_cast<double>(n - 1);
  c.lambda = m * std::tanh(dp);
  c.lambda_scaled = m * std::tanh(c_linear * dp);
  c.satisfied = c.lambda < 1.0;
  return c;
}

DirectedEdges::DirectedEdges(const Topology& topology) : incoming(topology.size()) {
  const std::size_t n = topology.size();
  for (ClientId i = 0; i < n; ++i) {
    for (ClientId j : topology.neighbors(i)) {
      incoming[j].push_back(source.size());
      source.push_back(i);
      target.push_back(j);
      length_km.push_back(topology.distance(i, j));
    }
  }
  // neighbor lists are sorted, so (j, i) is found by binary search over j's block
  reverse.resize(source.size());
  std::vector<std::size_t> first(n + 1, 0);
  for (ClientId s : source) ++first[s + 1];
  for (std::size_t i = 0; i < n; ++i) first[i + 1] += first[i];
  for (std::size_t e = 0; e < source.size(); ++e) {
    const auto lo = target.begin() + static_cast<std::ptrdiff_t>(first[target[e]]);
    const auto hi = target.begin() + static_cast<std::ptrdiff_t>(first[target[e] + 1]);
    reverse[e] = static_cast<std::size_t>(std::lower_bound(lo, hi, source[e]) - target.begin());
  }
}

std::vector<double> BeliefState::participation() const {
  std::vector<double> out;
  out.reserve(beliefs.size());
  for (const auto& b : beliefs) out.push_back(b[1]);
  return out;
}

std::vector<Message> initial_messages(const DirectedEdges& edges, Rng* rng) {
  std::vector<Message> m(edges.size(), Message{0.5, 0.5});
  if (rng == nullptr) return m;
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (Message& msg : m) {
    const double a = u(*rng);
    const double b = u(*rng);
    msg = {a / (a + b), b / (a + b)};
  }
  return m;
}

namespace {

void check_opinions(std::span<const double> opinions, const DirectedEdges& edges) {
  if (opinions.size() != edges.incoming.size()) throw DomainError("beliefprop: one opinion per client required");
  for (double r : opinions)
    if (!(r >= 0.0 && r <= 1.0)) throw DomainError("beliefprop: opinion outside [0,1]");
}

}  // namespace

double message_sweep(std::vector<Message>& messages, const DirectedEdges& edges, std::span<const double> opinions,
                     const BpParams& params) {
  check_opinions(opinions, edges);
  if (messages.size() != edges.size()) throw DomainError("message_sweep: message count does not match the edges");
  std::vector<Message> next(messages.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const ClientId i = edges.source[e];
    // product of messages into i from everyone except the receiver
    Message inbound{1.0, 1.0};
    for (std::size_t in : edges.incoming[i]) {
      if (in == edges.reverse[e]) continue;
      inbound[0] *= messages[in][0];
      inbound[1] *= messages[in][1];
    }
    Message out{0.0, 0.0};
    for (int xn = 0; xn < 2; ++xn)
      for (int xi = 0; xi < 2; ++xi)
        out[xn] += local_potential(opinions[i], xi, params) * pair_potential(edges.length_km[e], xi, xn, params) *
                   inbound[xi];
    const double z = out[0] + out[1];
    if (!std::isfinite(z)) throw NumericError("message_sweep: non-finite message");
    next[e] = z > 0.0 ? Message{out[0] / z, out[1] / z} : Message{0.5, 0.5};
  }
  double residual = 0.0;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    for (int s = 0; s < 2; ++s) {
      const double v = (1.0 - params.damping) * next[e][s] + params.damping * messages[e][s];
      residual = std::max(residual, std::abs(v - messages[e][s]));
      messages[e][s] = v;
    }
  }
  return residual;
}

std::vector<std::array<double, 2>> beliefs(std::span<const Message> messages, const DirectedEdges& edges,
                                           std::span<const double> opinions, const BpParams& params) {
  check_opinions(opinions, edges);
  if (messages.size() != edges.size()) throw DomainError("beliefs: message count does not match the edges");
  const std::size_t n = opinions.size();
  std::vector<std::array<double, 2>> b(n);
  double kappa = 0.0;
  for (ClientId c = 0; c < n; ++c) {
    for (int s = 0; s < 2; ++s) {
      double v = local_potential(opinions[c], s, params);
      for (std::size_t in : edges.incoming[c]) v *= messages[in][s];
      b[c][s] = v;
    }
    kappa += b[c][1];
  }
  if (!(kappa > 0.0)) throw DegenerateBeliefError("beliefs: every participation belief is zero");
  if (!std::isfinite(kappa)) throw NumericError("beliefs: non-finite normalizer");
  for (auto& v : b) {
    v[0] /= kappa;
    v[1] /= kappa;
  }
  return b;
}

BeliefState run_bp(std::span<const double> opinions, const Topology& topology, const BpParams& params,
                   std::optional<std::vector<Message>> start) {
  params.validate();
  const DirectedEdges edges(topology);
  BeliefState state;
  state.messages = start ? std::move(*start) : initial_messages(edges);
  if (state.messages.size() != edges.size()) throw DomainError("run_bp: initial messages do not match the edges");
  state.certificate =
      check_contraction(topology.size(), topology.max_pairwise_distance(), params.beta, params.c_linear);

  for (std::size_t it = 1; it <= params.max_iter; ++it) {
    state.residual = message_sweep(state.messages, edges, opinions, params);
    state.residual_history.push_back(state.residual);
    state.iterations = it;
    if (it == 1) state.initial_residual = state.residual;
    if (state.residual < params.tol) {
      state.converged = true;
      break;
    }
  }
  state.beliefs = beliefs(state.messages, edges, opinions, params);
  return state;
}

}  // namespace fedsel
