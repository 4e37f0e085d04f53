#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "roomswarm/environment.hpp"
#include "roomswarm/params.hpp"

namespace roomswarm {

/// Per-agent neighborhood aggregates for one time step.
///
/// Neighbors are other agents at Euclidean distance strictly below the radius.
/// The pair loop visits (i, j) with i < j in ascending order, so every sum is
/// accumulated in a fixed order and recomputation is bit-exact.
struct NeighborScan {
  std::vector<std::int32_t> count;
  std::vector<double> dist_sum;
  std::vector<double> cos_sum;  ///< sum of cos(heading) over neighbors (self excluded)
  std::vector<double> sin_sum;
  std::vector<double> self_cos;  ///< cos(heading) of each agent
  std::vector<double> self_sin;

  void run(std::span<const Vec2> positions, std::span<const double> headings, double radius);
};

struct NeighborStats {
  std::vector<std::int32_t> counts;
  std::vector<double> mean_dists;  ///< 0 for agents without neighbors
};

NeighborStats neighbor_stats(std::span<const Vec2> positions, double radius);

/// Observable record of one simulation. Arrays are row-major with the agent
/// index outermost: element (a, t) lives at a * T + t. Record t = 0 is the
/// initial state; records 1..T-1 follow successive synchronous updates.
struct TrajectorySet {
  SimConfig config;
  RoomConfig room;
  BeaconSet beacons;
  /// Sensing radius the neighbor channels were computed with; not part of the
  /// binary format (0 when unknown).
  double radius = 0.0;

  std::vector<double> x;             ///< A*T*2, (x, y) interleaved
  std::vector<double> theta;         ///< A*T
  std::vector<std::int32_t> ncount;  ///< A*T
  std::vector<double> dist;          ///< A*T

  std::size_t agents() const { return config.num_agents; }
  std::size_t steps() const { return config.num_steps; }
  std::size_t at(std::size_t a, std::size_t t) const { return a * steps() + t; }
  Vec2 position(std::size_t a, std::size_t t) const {
    const std::size_t i = 2 * at(a, t);
    return {x[i], x[i + 1]};
  }

  /// Allocates arrays for the configured A and T.
  void resize();

  /// Beacon each agent follows at record t (nearest detected beacon at onset,
  /// or at t itself when reassignment is enabled).
  std::optional<std::size_t> assigned_beacon(std::size_t a, std::size_t t) const;

  friend bool operator==(const TrajectorySet&, const TrajectorySet&) = default;
};

struct AugmentedSet {
  TrajectorySet traj;
  std::vector<double> angular_velocity;      ///< A*(T-1), rad/s
  std::vector<std::int32_t> neighbor_delta;  ///< A*(T-1)

  std::size_t at(std::size_t a, std::size_t t) const { return a * (traj.steps() - 1) + t; }
};

/// Throws std::invalid_argument when T < 2.
AugmentedSet augment(TrajectorySet traj);

}  // namespace roomswarm
