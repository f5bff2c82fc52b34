#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fedsel/rng.hpp"

namespace fedsel {

using ClientId = std::size_t;

struct Point {
  double x = 0.0;  // km
  double y = 0.0;  // km
};

double distance(const Point& a, const Point& b) noexcept;

// Undirected client graph with positions. Immutable after construction;
// adjacency is symmetric with a zero diagonal.
class Topology {
 public:
  // Throws ConfigError if sizes disagree, the matrix is asymmetric or has self-loops.
  Topology(std::vector<Point> positions, std::vector<std::uint8_t> adjacency);

  std::size_t size() const noexcept { return positions_.size(); }
  std::span<const Point> positions() const noexcept { return positions_; }
  const Point& position(ClientId n) const { return positions_.at(n); }
  bool adjacent(ClientId i, ClientId j) const { return adjacency_.at(i * size() + j) != 0; }
  std::span<const ClientId> neighbors(ClientId n) const { return neighbors_.at(n); }
  std::size_t edge_count() const noexcept;
  double distance(ClientId i, ClientId j) const;

  bool is_connected() const;
  // Longest shortest path in hops; nullopt when disconnected.
  std::optional<std::size_t> diameter() const;
  // Largest pairwise Euclidean distance over all clients (not just linked ones).
  double max_pairwise_distance() const noexcept;

  // Hop distances from `source`; unreachable entries are SIZE_MAX.
  std::vector<std::size_t> hop_distances(ClientId source) const;

 private:
  std::vector<Point> positions_;
  std::vector<std::uint8_t> adjacency_;
  std::vector<std::vector<ClientId>> neighbors_;
};

// Edge iff Euclidean distance <= link_radius.
Topology build_topology(std::vector<Point> positions, double link_radius_km);
// Same, also checking every position lies in [0, area_km]^2.
Topology build_topology(std::vector<Point> positions, double link_radius_km, double area_km);

// Uniform placement in [0, area_km]^2.
std::vector<Point> uniform_positions(std::size_t n, double area_km, Rng& rng);

// Large-scale path loss 128.1 + 37.6 log10(d), d in km. Throws DomainError for d <= 0.
double path_loss_db(double d_km);

// One uplink outcome X ~ Bernoulli(theta). Throws DomainError for theta outside [0,1].
bool sample_uplink(double theta, Rng& rng);

struct PathLossChannel {
  double tx_power_dbm = 20.0;
  double noise_dbm = -104.0;
  double snr_threshold_db = 0.0;
  double shadowing_std_db = 8.0;  // fade margin; 0 gives a hard threshold
  double min_distance_km = 0.001;
};

enum class ChannelMode { fixed, pathloss };

struct ChannelModel {
  ChannelMode mode = ChannelMode::fixed;
  std::vector<double> theta;  // per-client success probability

  double success_probability(ClientId n) const { return theta.at(n); }
};

// Every theta must lie in [0,1]; throws ConfigError otherwise.
ChannelModel fixed_channel(std::vector<double> theta);

// theta_n = P[received SNR + shadowing >= threshold], with distance to `server`.
ChannelModel pathloss_channel(std::span<const Point> positions, const Point& server, const PathLossChannel& params);

}  // namespace fedsel
