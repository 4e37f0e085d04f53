#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "roomswarm/random.hpp"

namespace roomswarm {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double norm(Vec2 a) { return std::sqrt(a.x * a.x + a.y * a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(b - a); }

/// Axis-aligned room centered at the origin of the room frame.
struct RoomConfig {
  double width = 10.0;
  double height = 10.0;
  double detection_range = 20.0;  ///< R_M, measured from the room center
  Vec2 world_position{};          ///< kept for format compatibility; the room does not move

  double half_width() const { return 0.5 * width; }
  double half_height() const { return 0.5 * height; }
  bool contains(Vec2 p) const {
    return std::abs(p.x) <= half_width() && std::abs(p.y) <= half_height();
  }
  bool on_boundary(Vec2 p) const {
    return std::abs(p.x) == half_width() || std::abs(p.y) == half_height();
  }

  friend bool operator==(const RoomConfig&, const RoomConfig&) = default;
};

/// Throws std::invalid_argument naming the first violated invariant.
void check_room(const RoomConfig& room);

/// Beacon positions in room-centered coordinates.
struct BeaconSet {
  std::vector<Vec2> positions;

  std::size_t size() const { return positions.size(); }
  friend bool operator==(const BeaconSet&, const BeaconSet&) = default;
};

/// Rejection-samples `count` points uniformly from the disc of radius R_M
/// with the room rectangle removed.
BeaconSet place_beacons(const RoomConfig& room, std::size_t count, Rng& rng);

/// Indices of beacons strictly inside the detection range, ascending.
std::vector<std::size_t> detect_beacons(const BeaconSet& beacons, const RoomConfig& room);

/// Closest detected beacon, lowest index on ties. std::nullopt when nothing is in range.
std::optional<std::size_t> nearest_beacon(Vec2 agent, const BeaconSet& beacons,
                                          const std::vector<std::size_t>& detected);

/// Clamp each coordinate to the room rectangle.
inline Vec2 confine(Vec2 p, const RoomConfig& room) {
  const double hw = room.half_width();
  const double hh = room.half_height();
  return {p.x < -hw ? -hw : (p.x > hw ? hw : p.x), p.y < -hh ? -hh : (p.y > hh ? hh : p.y)};
}

}  // namespace roomswarm
