#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "roomswarm/environment.hpp"
#include "roomswarm/observables.hpp"
#include "roomswarm/params.hpp"
#include "roomswarm/random.hpp"

namespace roomswarm {

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double pi = std::numbers::pi;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  // Every angle in the update is a sum of at most a few wrapped terms, so one
  // shift almost always suffices.
  if (a > pi) {
    a -= two_pi;
  } else if (a <= -pi) {
    a += two_pi;
  }
  if (a > pi || a <= -pi) {
    a = std::remainder(a, two_pi);
    if (a <= -pi) a += two_pi;
  }
  return a;
}

struct WorldState {
  std::vector<Vec2> positions;
  std::vector<double> headings;
  std::vector<std::optional<std::size_t>> assigned_beacon;

  std::size_t size() const { return positions.size(); }
};

/// Everything about the world that stays fixed during a rollout.
struct Environment {
  RoomConfig room;
  BeaconSet beacons;
  std::vector<std::size_t> detected;  ///< cached detect_beacons(beacons, room)

  Environment(RoomConfig room_, BeaconSet beacons_);
};

/// atan2 of the agent-to-beacon vector; 0 for coincident points.
double beacon_bearing(Vec2 agent, Vec2 beacon);

/// Relaxes the heading toward the bearing at unit rate with uniform noise in
/// [-kappa, kappa]: theta + (wrap(bearing - theta) + phi) * dt, wrapped.
/// Draws one uniform.
double external_orientation_step(double heading, double bearing, double dt, double kappa, Rng& rng);

/// Euler-Maruyama drift-diffusion increment. Draws two standard normals (x then y).
Vec2 external_displacement(double heading, double v, double sigma, double dt, Rng& rng);

inline Vec2 external_position_step(Vec2 pos, double heading, double v, double sigma, double dt,
                                   Rng& rng) {
  return pos + external_displacement(heading, v, sigma, dt, rng);
}

/// Circular mean of self and neighbor headings plus N(0, eta) noise. Draws one normal.
double internal_orientation(double self_heading, std::span<const double> neighbor_headings,
                            double eta, Rng& rng);

/// Same as internal_orientation, from precomputed cos/sin sums that already
/// include the agent itself.
double internal_orientation_from_sums(double self_heading, double cos_sum, double sin_sum,
                                      double eta, Rng& rng);

inline Vec2 internal_displacement(double new_heading, double v, double dt) {
  return {v * std::cos(new_heading) * dt, v * std::sin(new_heading) * dt};
}

inline Vec2 internal_position_step(Vec2 pos, double new_heading, double v, double dt) {
  return pos + internal_displacement(new_heading, v, dt);
}

/// Heading blend along shortest arcs: theta + w*wrap(ext - theta) + (1-w)*wrap(int - theta).
inline double blend_heading(double heading, double external, double internal, double w) {
  return wrap_angle(heading + w * wrap_angle(external - heading) +
                    (1.0 - w) * wrap_angle(internal - heading));
}

/// One synchronous step for every agent in index order. Per agent the noise
/// draw order is: external rotational uniform, two positional normals,
/// internal rotational normal.
WorldState modulated_update(const WorldState& state, const GlobalParams& params,
                            const FixedParams& fixed, const Environment& env, double dt,
                            Rng& rng, bool reassign_beacons = false);

/// Same as modulated_update with the pre-step neighbor scan supplied.
void modulated_update_into(const WorldState& state, const NeighborScan& scan,
                           const GlobalParams& params, const FixedParams& fixed,
                           const Environment& env, double dt, Rng& rng, WorldState& out);

/// Uniform positions in the room, uniform headings, nearest-beacon assignment.
WorldState initial_state(const Environment& env, std::size_t num_agents, Rng& rng);

/// Full rollout. The generator is seeded from config.seed; T records are
/// produced (record 0 is the initial state).
TrajectorySet simulate(const GlobalParams& params, const FixedParams& fixed,
                       const Environment& env, const SimConfig& config);

TrajectorySet simulate(const GlobalParams& params, const FixedParams& fixed,
                       const RoomConfig& room, const BeaconSet& beacons, const SimConfig& config);

}  // namespace roomswarm
