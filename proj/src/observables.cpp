#include "roomswarm/observables.hpp"

#include <cmath>
#include <stdexcept>

#include "roomswarm/dynamics.hpp"

namespace roomswarm {

void NeighborScan::run(std::span<const Vec2> positions, std::span<const double> headings,
                       double radius) {
  const std::size_t n = positions.size();
  count.assign(n, 0);
  dist_sum.assign(n, 0.0);
  cos_sum.assign(n, 0.0);
  sin_sum.assign(n, 0.0);

  const bool with_headings = !headings.empty();
  std::vector<double>& c = self_cos;
  std::vector<double>& s = self_sin;
  if (with_headings) {
    c.resize(n);
    s.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      c[i] = std::cos(headings[i]);
      s[i] = std::sin(headings[i]);
    }
  }

  const double r2 = radius * radius;
  thread_local std::vector<double> xs, ys, d2row;
  thread_local std::vector<std::uint32_t> hits;
  xs.resize(n);
  ys.resize(n);
  d2row.resize(n);
  hits.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = positions[i].x;
    ys[i] = positions[i].y;
  }
  const double* __restrict px = xs.data();
  const double* __restrict py = ys.data();
  double* __restrict d2 = d2row.data();
  std::uint32_t* __restrict hit = hits.data();
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = px[i];
    const double yi = py[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = px[j] - xi;
      const double dy = py[j] - yi;
      d2[j] = dx * dx + dy * dy;
    }
    std::size_t m = 0;
    for (std::size_t j = i + 1; j < n; ++j) {
      hit[m] = static_cast<std::uint32_t>(j);
      m += d2[j] < r2;
    }
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t j = hits[k];
      const double d = std::sqrt(d2row[j]);
      ++count[i];
      ++count[j];
      dist_sum[i] += d;
      dist_sum[j] += d;
      if (with_headings) {
        cos_sum[i] += c[j];
        sin_sum[i] += s[j];
        cos_sum[j] += c[i];
        sin_sum[j] += s[i];
      }
    }
  }
}

NeighborStats neighbor_stats(std::span<const Vec2> positions, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("neighbor radius must be > 0");
  NeighborScan scan;
  scan.run(positions, {}, radius);
  NeighborStats out;
  out.counts = scan.count;
  out.mean_dists.resize(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    out.mean_dists[i] = scan.count[i] > 0 ? scan.dist_sum[i] / scan.count[i] : 0.0;
  }
  return out;
}

void TrajectorySet::resize() {
  const std::size_t n = agents() * steps();
  x.assign(2 * n, 0.0);
  theta.assign(n, 0.0);
  ncount.assign(n, 0);
  dist.assign(n, 0.0);
}

std::optional<std::size_t> TrajectorySet::assigned_beacon(std::size_t a, std::size_t t) const {
  const auto detected = detect_beacons(beacons, room);
  return nearest_beacon(position(a, config.reassign_beacons ? t : 0), beacons, detected);
}

AugmentedSet augment(TrajectorySet traj) {
  const std::size_t A = traj.agents();
  const std::size_t T = traj.steps();
  if (T < 2) throw std::invalid_argument("augment requires at least 2 time steps");

  AugmentedSet out;
  out.angular_velocity.resize(A * (T - 1));
  out.neighbor_delta.resize(A * (T - 1));
  const double dt = traj.config.dt;
  for (std::size_t a = 0; a < A; ++a) {
    for (std::size_t t = 0; t + 1 < T; ++t) {
      const std::size_t k = a * (T - 1) + t;
      out.angular_velocity[k] = wrap_angle(traj.theta[traj.at(a, t + 1)] - traj.theta[traj.at(a, t)]) / dt;
      out.neighbor_delta[k] = traj.ncount[traj.at(a, t + 1)] - traj.ncount[traj.at(a, t)];
    }
  }
  out.traj = std::move(traj);
  return out;
}

}  // namespace roomswarm
