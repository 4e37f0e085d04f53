#include "roomswarm/dynamics.hpp"

#include <stdexcept>

namespace roomswarm {

Environment::Environment(RoomConfig room_, BeaconSet beacons_)
    : room(room_), beacons(std::move(beacons_)), detected(detect_beacons(beacons, room)) {}

double beacon_bearing(Vec2 agent, Vec2 beacon) {
  const Vec2 d = beacon - agent;
  if (d.x == 0.0 && d.y == 0.0) return 0.0;
  return wrap_angle(std::atan2(d.y, d.x));
}

double external_orientation_step(double heading, double bearing, double dt, double kappa, Rng& rng) {
  const double phi = kappa * (2.0 * uniform01(rng) - 1.0);
  return wrap_angle(heading + (wrap_angle(bearing - heading) + phi) * dt);
}

Vec2 external_displacement(double heading, double v, double sigma, double dt, Rng& rng) {
  const double z1 = standard_normal(rng);
  const double z2 = standard_normal(rng);
  const double diffusion = sigma * std::sqrt(dt);
  return {v * std::cos(heading) * dt + diffusion * z1, v * std::sin(heading) * dt + diffusion * z2};
}

double internal_orientation_from_sums(double self_heading, double cos_sum, double sin_sum,
                                      double eta, Rng& rng) {
  const double noise = std::sqrt(eta) * standard_normal(rng);
  // Zero resultant (antipodal cancellation) has no mean direction.
  const double mean = (cos_sum * cos_sum + sin_sum * sin_sum < 1e-24) ? self_heading
                                                                       : std::atan2(sin_sum, cos_sum);
  return wrap_angle(mean + noise);
}

double internal_orientation(double self_heading, std::span<const double> neighbor_headings,
                            double eta, Rng& rng) {
  double c = std::cos(self_heading);
  double s = std::sin(self_heading);
  for (double h : neighbor_headings) {
    c += std::cos(h);
    s += std::sin(h);
  }
  return internal_orientation_from_sums(self_heading, c, s, eta, rng);
}

void modulated_update_into(const WorldState& state, const NeighborScan& scan,
                           const GlobalParams& params, const FixedParams& fixed,
                           const Environment& env, double dt, Rng& rng, WorldState& out) {
  const std::size_t n = state.size();
  out.positions.resize(n);
  out.headings.resize(n);
  out.assigned_beacon = state.assigned_beacon;

  for (std::size_t a = 0; a < n; ++a) {
    const Vec2 pos = state.positions[a];
    const double heading = state.headings[a];
    const auto beacon = state.assigned_beacon[a];

    // Shortest-arc error toward the beacon, wrap(bearing - heading), taken as
    // the angle between the heading vector and the beacon direction.
    double bearing_error = 0.0;
    if (beacon) {
      const Vec2 d = env.beacons.positions[*beacon] - pos;
      if (d.x != 0.0 || d.y != 0.0) {
        const double hc = scan.self_cos[a];
        const double hs = scan.self_sin[a];
        bearing_error = std::atan2(hc * d.y - hs * d.x, hc * d.x + hs * d.y);
      } else {
        bearing_error = wrap_angle(-heading);
      }
    }

    // Noise is drawn for every agent, with or without a beacon, so the stream
    // layout does not depend on the environment.
    const double phi = fixed.kappa * (2.0 * uniform01(rng) - 1.0);
    const double ext_heading = wrap_angle(heading + (bearing_error + phi) * dt);
    const Vec2 ext_step = external_displacement(ext_heading, params.v, fixed.sigma, dt, rng);
    const double int_heading = internal_orientation_from_sums(
        heading, scan.cos_sum[a] + scan.self_cos[a], scan.sin_sum[a] + scan.self_sin[a], params.eta, rng);
    const Vec2 int_step = internal_displacement(int_heading, params.v, dt);

    const double w = beacon ? params.w : 0.0;
    out.headings[a] = blend_heading(heading, ext_heading, int_heading, w);
    out.positions[a] = confine(pos + (w * ext_step + (1.0 - w) * int_step), env.room);
  }
}

WorldState modulated_update(const WorldState& state, const GlobalParams& params,
                            const FixedParams& fixed, const Environment& env, double dt,
                            Rng& rng, bool reassign_beacons) {
  NeighborScan scan;
  scan.run(state.positions, state.headings, params.r);
  WorldState out;
  modulated_update_into(state, scan, params, fixed, env, dt, rng, out);
  if (reassign_beacons) {
    for (std::size_t a = 0; a < out.size(); ++a) {
      out.assigned_beacon[a] = nearest_beacon(out.positions[a], env.beacons, env.detected);
    }
  }
  return out;
}

WorldState initial_state(const Environment& env, std::size_t num_agents, Rng& rng) {
  WorldState s;
  s.positions.resize(num_agents);
  s.headings.resize(num_agents);
  s.assigned_beacon.resize(num_agents);
  for (std::size_t a = 0; a < num_agents; ++a) {
    const double ux = uniform01(rng);
    const double uy = uniform01(rng);
    const double uh = uniform01(rng);
    s.positions[a] = {(ux - 0.5) * env.room.width, (uy - 0.5) * env.room.height};
    s.headings[a] = std::numbers::pi - 2.0 * std::numbers::pi * uh;  // (-pi, pi]
  }
  for (std::size_t a = 0; a < num_agents; ++a) {
    s.assigned_beacon[a] = nearest_beacon(s.positions[a], env.beacons, env.detected);
  }
  return s;
}

TrajectorySet simulate(const GlobalParams& params, const FixedParams& fixed,
                       const Environment& env, const SimConfig& config) {
  if (auto v = validate_config(config); !v.empty()) throw std::invalid_argument(v.front());
  if (!(params.r > 0.0)) throw std::invalid_argument("r must be > 0");
  if (!(params.eta >= 0.0) || !(params.v >= 0.0) || !(params.w >= 0.0 && params.w <= 1.0)) {
    throw std::invalid_argument("simulation parameters out of range");
  }

  Rng rng(derive_seed(config.seed, SeedStream::simulation, 0));
  const std::size_t A = config.num_agents;
  const std::size_t T = config.num_steps;

  TrajectorySet traj;
  traj.config = config;
  traj.room = env.room;
  traj.beacons = env.beacons;
  traj.radius = params.r;
  traj.resize();

  WorldState state = initial_state(env, A, rng);
  WorldState next;
  NeighborScan scan;
  for (std::size_t t = 0; t < T; ++t) {
    scan.run(state.positions, state.headings, params.r);
    for (std::size_t a = 0; a < A; ++a) {
      const std::size_t k = traj.at(a, t);
      traj.x[2 * k] = state.positions[a].x;
      traj.x[2 * k + 1] = state.positions[a].y;
      traj.theta[k] = state.headings[a];
      traj.ncount[k] = scan.count[a];
      traj.dist[k] = scan.count[a] > 0 ? scan.dist_sum[a] / scan.count[a] : 0.0;
    }
    if (t + 1 == T) break;
    modulated_update_into(state, scan, params, fixed, env, config.dt, rng, next);
    if (config.reassign_beacons) {
      for (std::size_t a = 0; a < A; ++a) {
        next.assigned_beacon[a] = nearest_beacon(next.positions[a], env.beacons, env.detected);
      }
    }
    std::swap(state, next);
  }
  return traj;
}

TrajectorySet simulate(const GlobalParams& params, const FixedParams& fixed,
                       const RoomConfig& room, const BeaconSet& beacons, const SimConfig& config) {
  return simulate(params, fixed, Environment(room, beacons), config);
}

}  // namespace roomswarm
