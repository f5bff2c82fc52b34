#include "fedsel/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

#include "fedsel/error.hpp"

namespace fedsel {

double distance(const Point& a, const Point& b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

Topology::Topology(std::vector<Point> positions, std::vector<std::uint8_t> adjacency)
    : positions_(std::move(positions)), adjacency_(std::move(adjacency)) {
  const std::size_t n = positions_.size();
  if (n == 0) throw ConfigError("topology: no clients");
  if (adjacency_.size() != n * n) throw ConfigError("topology: adjacency must be N x N");
  neighbors_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (adjacency_[i * n + i] != 0) throw ConfigError("topology: self-loop at client " + std::to_string(i));
    for (std::size_t j = 0; j < n; ++j) {
      const bool a = adjacency_[i * n + j] != 0;
      if (a != (adjacency_[j * n + i] != 0)) throw ConfigError("topology: adjacency is not symmetric");
      adjacency_[i * n + j] = a ? 1 : 0;
      if (a) neighbors_[i].push_back(j);
    }
  }
}

std::size_t Topology::edge_count() const noexcept {
  std::size_t deg = 0;
  for (const auto& nb : neighbors_) deg += nb.size();
  return deg / 2;
}

double Topology::distance(ClientId i, ClientId j) const { return fedsel::distance(position(i), position(j)); }

std::vector<std::size_t> Topology::hop_distances(ClientId source) const {
  std::vector<std::size_t> dist(size(), std::numeric_limits<std::size_t>::max());
  std::queue<ClientId> frontier;
  dist.at(source) = 0;
  frontier.push(source);
  while (!frontier.empty()) {
    const ClientId u = frontier.front();
    frontier.pop();
    for (ClientId v : neighbors_[u]) {
      if (dist[v] == std::numeric_limits<std::size_t>::max()) {
        dist[v] = dist[u] + 1;
        frontier.push(v);
      }
    }
  }
  return dist;
}

bool Topology::is_connected() const {
  const auto d = hop_distances(0);
  return std::none_of(d.begin(), d.end(), [](std::size_t x) { return x == std::numeric_limits<std::size_t>::max(); });
}

std::optional<std::size_t> Topology::diameter() const {
  std::size_t best = 0;
  for (ClientId s = 0; s < size(); ++s) {
    for (std::size_t d : hop_distances(s)) {
      if (d == std::numeric_limits<std::size_t>::max()) return std::nullopt;
      best = std::max(best, d);
    }
  }
  return best;
}

double Topology::max_pairwise_distance() const noexcept {
  double best = 0.0;
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t j = i + 1; j < size(); ++j) best = std::max(best, fedsel::distance(positions_[i], positions_[j]));
  return best;
}

Topology build_topology(std::vector<Point> positions, double link_radius_km) {
  if (positions.empty()) throw ConfigError("build_topology: empty position list");
  if (!(link_radius_km > 0.0)) throw ConfigError("build_topology: link radius must be positive");
  const std::size_t n = positions.size();
  std::vector<std::uint8_t> adj(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (distance(positions[i], positions[j]) <= link_radius_km) adj[i * n + j] = adj[j * n + i] = 1;
    }
  }
  return Topology(std::move(positions), std::move(adj));
}

Topology build_topology(std::vector<Point> positions, double link_radius_km, double area_km) {
  for (const Point& p : positions) {
    if (p.x < 0.0 || p.y < 0.0 || p.x > area_km || p.y > area_km)
      throw ConfigError("build_topology: position outside the configured area");
  }
  return build_topology(std::move(positions), link_radius_km);
}

std::vector<Point> uniform_positions(std::size_t n, double area_km, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, area_km);
  std::vector<Point> out(n);
  for (Point& p : out) {
    p.x = u(rng);
    p.y = u(rng);
  }
  return out;
}

double path_loss_db(double d_km) {
  if (!(d_km > 0.0)) throw DomainError("path_loss_db: distance must be positive");
  return 128.1 + 37.6 * std::log10(d_km);
}

bool sample_uplink(double theta, Rng& rng) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("sample_uplink: theta outside [0,1]");
  // theta in {0,1} consumes no randomness
  if (theta == 1.0) return true;
  if (theta == 0.0) return false;
  return std::bernoulli_distribution(theta)(rng);
}

ChannelModel fixed_channel(std::vector<double> theta) {
  for (double t : theta)
    if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("channel: theta outside [0,1]");
  return ChannelModel{ChannelMode::fixed, std::move(theta)};
}

ChannelModel pathloss_channel(std::span<const Point> positions, const Point& server, const PathLossChannel& params) {
  if (params.shadowing_std_db < 0.0) throw ConfigError("channel: negative shadowing std");
  ChannelModel model{ChannelMode::pathloss, {}};
  model.theta.reserve(positions.size());
  for (const Point& p : positions) {
    const double d = std::max(distance(p, server), params.min_distance_km);
    const double snr_db = params.tx_power_dbm - path_loss_db(d) - params.noise_dbm;
    double theta = 0.0;
    if (params.shadowing_std_db == 0.0) {
      theta = snr_db >= params.snr_threshold_db ? 1.0 : 0.0;
    } else {
      theta = 0.5 * std::erfc((params.snr_threshold_db - snr_db) / (params.shadowing_std_db * std::sqrt(2.0)));
    }
    model.theta.push_back(std::clamp(theta, 0.0, 1.0));
  }
  return model;
}

}  // namespace fedsel
