#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "roomswarm/diagnostics.hpp"
#include "roomswarm/dynamics.hpp"
#include "roomswarm/params.hpp"

namespace roomswarm {

/// Invalid configuration content; the message names the offending field or line.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything needed to reproduce a rollout or a batch.
///
/// JSON keys: w, r, v, eta, kappa, sigma, A, B, T, dt, seed (required keys
/// fall back to defaults when absent) plus the optional room_width,
/// room_height, detection_range, layout_seed, reassign_beacons and prior.
struct RunConfig {
  GlobalParams params;
  FixedParams fixed;
  SimConfig sim;
  RoomConfig room;
  PriorSpec prior;
  std::uint64_t layout_seed = 1;  ///< seeds beacon placement, independent of the rollout seed
};

nlohmann::json to_json(const RunConfig& cfg);

/// Throws ConfigError naming the field on type errors, unknown keys or
/// violated invariants.
RunConfig config_from_json(const nlohmann::json& j);

/// Parses a config file, or the "config" member of a run manifest.
/// Syntax errors report line and column.
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json parse_json_text(const std::string& text, const std::string& origin);

/// Throws ConfigError listing all violated invariants of the run.
void check_config(const RunConfig& cfg, bool check_params = true);

/// Beacon layout derived from (room, B, layout_seed).
BeaconSet make_layout(const RunConfig& cfg);

nlohmann::json to_json(const RecoveryReport& report);

}  // namespace roomswarm
