#include "roomswarm/environment.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace roomswarm {

void check_room(const RoomConfig& room) {
  if (!(room.width > 0.0)) throw std::invalid_argument("room width must be > 0");
  if (!(room.height > 0.0)) throw std::invalid_argument("room height must be > 0");
  if (!(room.detection_range > 0.5 * std::max(room.width, room.height))) {
    throw std::invalid_argument("detection_range must exceed max(width, height)/2");
  }
}

BeaconSet place_beacons(const RoomConfig& room, std::size_t count, Rng& rng) {
  check_room(room);
  if (count < 1) throw std::invalid_argument("beacon count must be >= 1");

  const double R = room.detection_range;
  // The annulus can be a sliver when R_M barely exceeds the half-extent; bound the work.
  const std::size_t max_attempts = 100000 * count;
  BeaconSet out;
  out.positions.reserve(count);
  std::size_t attempts = 0;
  while (out.positions.size() < count) {
    if (++attempts > max_attempts) {
      throw std::runtime_error("beacon placement failed: annular region too small");
    }
    const Vec2 p{R * (2.0 * uniform01(rng) - 1.0), R * (2.0 * uniform01(rng) - 1.0)};
    if (norm(p) >= R) continue;  // strict, so every placed beacon is detected
    if (room.contains(p)) continue;
    out.positions.push_back(p);
  }
  return out;
}

std::vector<std::size_t> detect_beacons(const BeaconSet& beacons, const RoomConfig& room) {
  std::vector<std::size_t> idx;
  for (std::size_t b = 0; b < beacons.size(); ++b) {
    if (norm(beacons.positions[b]) < room.detection_range) idx.push_back(b);
  }
  return idx;
}

std::optional<std::size_t> nearest_beacon(Vec2 agent, const BeaconSet& beacons,
                                          const std::vector<std::size_t>& detected) {
  std::optional<std::size_t> best;
  double best_d2 = 0.0;
  for (std::size_t b : detected) {
    const Vec2 d = beacons.positions.at(b) - agent;
    const double d2 = d.x * d.x + d.y * d.y;
    if (!best || d2 < best_d2 || (d2 == best_d2 && b < *best)) {
      best = b;
      best_d2 = d2;
    }
  }
  return best;
}

}  // namespace roomswarm
