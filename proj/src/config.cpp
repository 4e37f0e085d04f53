#include "roomswarm/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace roomswarm {

using nlohmann::json;

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "w", "r", "v", "eta", "kappa", "sigma", "A", "B", "T", "dt", "seed",
      "room_width", "room_height", "detection_range", "layout_seed", "reassign_beacons", "prior"};
  return keys;
}

double number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(std::string("field '") + key + "': expected a number, got " + v.type_name());
  return v.get<double>();
}

std::uint64_t unsigned_integer(const json& j, const char* key, std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d >= 0.0 && d == std::floor(d) && d < 1.8446744073709552e19) return static_cast<std::uint64_t>(d);
  }
  throw ConfigError(std::string("field '") + key + "': expected a non-negative integer");
}

std::uint32_t count(const json& j, const char* key, std::uint32_t fallback) {
  const std::uint64_t v = unsigned_integer(j, key, fallback);
  if (v > 0xffffffffULL) throw ConfigError(std::string("field '") + key + "': value too large");
  return static_cast<std::uint32_t>(v);
}

std::pair<double, double> shape_pair(const json& j, const char* key, std::pair<double, double> fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ConfigError(std::string("field 'prior.") + key + "': expected [a, b]");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

}  // namespace

json to_json(const RunConfig& c) {
  json j;
  j["w"] = c.params.w;
  j["r"] = c.params.r;
  j["v"] = c.params.v;
  j["eta"] = c.params.eta;
  j["kappa"] = c.fixed.kappa;
  j["sigma"] = c.fixed.sigma;
  j["A"] = c.sim.num_agents;
  j["B"] = c.sim.num_beacons;
  j["T"] = c.sim.num_steps;
  j["dt"] = c.sim.dt;
  j["seed"] = c.sim.seed;
  j["room_width"] = c.room.width;
  j["room_height"] = c.room.height;
  j["detection_range"] = c.room.detection_range;
  j["layout_seed"] = c.layout_seed;
  j["reassign_beacons"] = c.sim.reassign_beacons;
  j["prior"] = {{"w", {c.prior.w.alpha, c.prior.w.beta}},
                {"r", {c.prior.r.mu, c.prior.r.s}},
                {"v", {c.prior.v.alpha, c.prior.v.beta}},
                {"eta", {c.prior.eta.alpha, c.prior.eta.beta}}};
  return j;
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known_keys().contains(key)) throw ConfigError("unknown field '" + key + "'");
  }
  RunConfig c;
  c.params.w = number(j, "w", c.params.w);
  c.params.r = number(j, "r", c.params.r);
  c.params.v = number(j, "v", c.params.v);
  c.params.eta = number(j, "eta", c.params.eta);
  c.fixed.kappa = number(j, "kappa", c.fixed.kappa);
  c.fixed.sigma = number(j, "sigma", c.fixed.sigma);
  c.sim.num_agents = count(j, "A", c.sim.num_agents);
  c.sim.num_beacons = count(j, "B", c.sim.num_beacons);
  c.sim.num_steps = count(j, "T", c.sim.num_steps);
  c.sim.dt = number(j, "dt", c.sim.dt);
  c.sim.seed = unsigned_integer(j, "seed", c.sim.seed);
  c.room.width = number(j, "room_width", c.room.width);
  c.room.height = number(j, "room_height", c.room.height);
  c.room.detection_range = number(j, "detection_range", c.room.detection_range);
  c.layout_seed = unsigned_integer(j, "layout_seed", c.layout_seed);
  if (j.contains("reassign_beacons")) {
    if (!j.at("reassign_beacons").is_boolean()) throw ConfigError("field 'reassign_beacons': expected true or false");
    c.sim.reassign_beacons = j.at("reassign_beacons").get<bool>();
  }
  if (j.contains("prior")) {
    const json& p = j.at("prior");
    if (!p.is_object()) throw ConfigError("field 'prior': expected an object");
    auto [wa, wb] = shape_pair(p, "w", {c.prior.w.alpha, c.prior.w.beta});
    auto [rm, rs] = shape_pair(p, "r", {c.prior.r.mu, c.prior.r.s});
    auto [va, vb] = shape_pair(p, "v", {c.prior.v.alpha, c.prior.v.beta});
    auto [ea, eb] = shape_pair(p, "eta", {c.prior.eta.alpha, c.prior.eta.beta});
    c.prior = PriorSpec{{wa, wb}, {rm, rs}, {va, vb}, {ea, eb}};
    for (double s : {wa, wb, rs, va, vb, ea, eb}) {
      if (!(s > 0.0)) throw ConfigError("field 'prior': shape and scale values must be > 0");
    }
  }
  return c;
}

json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into line:column.
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream os;
    os << origin << ":" << line << ":" << col << ": malformed JSON";
    throw ConfigError(os.str());
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  json j = parse_json_text(ss.str(), path.string());
  try {
    if (j.is_object() && j.contains("config") && j.contains("command")) return config_from_json(j.at("config"));
    return config_from_json(j);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void check_config(const RunConfig& cfg, bool check_params) {
  std::vector<std::string> problems;
  if (check_params) {
    for (auto& p : validate_params(cfg.params)) problems.push_back(std::move(p));
  }
  for (auto& p : validate_fixed(cfg.fixed)) problems.push_back(std::move(p));
  for (auto& p : validate_config(cfg.sim)) problems.push_back(std::move(p));
  try {
    check_room(cfg.room);
  } catch (const std::invalid_argument& e) {
    problems.emplace_back(e.what());
  }
  if (problems.empty()) return;
  std::string msg = "invalid configuration:";
  for (const auto& p : problems) msg += "\n  " + p;
  throw ConfigError(msg);
}

BeaconSet make_layout(const RunConfig& cfg) {
  Rng rng(derive_seed(cfg.layout_seed, SeedStream::layout, 0));
  return place_beacons(cfg.room, cfg.sim.num_beacons, rng);
}

json to_json(const RecoveryReport& report) {
  json j;
  j["cases"] = report.cases;
  j["alpha_grid_size"] = report.grid_size;
  j["estimator"] = report.estimator;
  j["nrmse_normalization"] = "prior support for w, v, eta; observed truth range for r";
  json params = json::object();
  for (const auto& p : report.params) {
    json jp;
    jp["ece"] = p.ece;
    jp["nrmse"] = p.nrmse;
    jp["posterior_contraction"] = p.contraction;
    jp["recovery_correlation"] = p.correlation_defined ? json(p.correlation) : json(nullptr);
    jp["degenerate_posteriors"] = p.degenerate_posteriors;
    jp["range"] = {p.range_min, p.range_max};
    json curve = json::array();
    for (std::size_t k = 0; k < p.curve.alphas.size(); ++k) {
      curve.push_back({{"alpha", p.curve.alphas[k]},
                       {"coverage", p.curve.coverage[k]},
                       {"lower95", p.curve.band[k].lower},
                       {"upper95", p.curve.band[k].upper}});
    }
    jp["coverage"] = std::move(curve);
    params[p.name] = std::move(jp);
  }
  j["parameters"] = std::move(params);
  return j;
}

}  // namespace roomswarm
