#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "roomswarm/diagnostics.hpp"
#include "roomswarm/inference.hpp"
#include "roomswarm/observables.hpp"

namespace roomswarm::io {

/// A file could not be opened, written or renamed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or truncated binary content; `offset` is the byte position where decoding stopped.
class FormatError : public std::runtime_error {
 public:
  FormatError(std::size_t offset, const std::string& what)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

using Bytes = std::vector<std::uint8_t>;

inline constexpr std::uint16_t kTrajectoryVersion = 1;
inline constexpr std::uint16_t kTableVersion = 1;

// Trajectory layout, all little-endian:
//   "SWRM" | u16 version | u32 A | u32 B | u32 T | f64 dt | u64 seed
//   | f64 X[A][T][2] | f64 Theta[A][T] | f64 D[A][T] | i32 N[A][T] | f64 beacons[B][2]
// D is 0 where N is 0. Room geometry and the sensing radius are not stored.
Bytes encode_trajectory(const TrajectorySet& traj);
/// The room is not part of the format; the caller supplies it.
TrajectorySet decode_trajectory(std::span<const std::uint8_t> bytes, const RoomConfig& room = {});

// Reference table layout, all little-endian:
//   "SWRT" | u16 version | u32 N | u32 K | u32 A | u32 B | u32 T | f64 dt | u64 base_seed
//   | u8 reassign | f64 room[3] (width, height, R_M) | f64 fixed[2] (kappa, sigma)
//   | f64 prior[8] | f64 params[N][4] | f64 summaries[N][K] | u64 seeds[N] | f64 beacons[B][2]
Bytes encode_table(const ReferenceTable& table);
ReferenceTable decode_table(std::span<const std::uint8_t> bytes);

Bytes read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

/// Long format: agent,t,x,y,theta,n,d
std::string trajectory_csv(const TrajectorySet& traj);

/// index,x,y
std::string beacons_csv(const BeaconSet& beacons);
BeaconSet parse_beacons_csv(const std::string& text);

/// Header row of statistic names, then one row per vector.
std::string summaries_csv(std::span<const SummaryVector> batch);

/// w,r,v,eta,weight
std::string posterior_csv(const PosteriorSamples& posterior);

/// param,alpha,coverage,lower95,upper95
std::string coverage_csv(const RecoveryReport& report);

/// case,param,truth,median
std::string recovery_csv(const RecoveryReport& report);

/// Shortest round-trip decimal representation.
std::string format_double(double x);

}  // namespace roomswarm::io
