#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "roomswarm/config.hpp"
#include "roomswarm/io.hpp"

using namespace roomswarm;
namespace fs = std::filesystem;

namespace {

TrajectorySet small_rollout(std::uint32_t A = 6, std::uint32_t T = 15) {
  RunConfig cfg;
  cfg.sim.num_agents = A;
  cfg.sim.num_steps = T;
  cfg.sim.seed = 12;
  return simulate(cfg.params, cfg.fixed, Environment(cfg.room, make_layout(cfg)), cfg.sim);
}

template <class T>
T read_le(const io::Bytes& b, std::size_t at) {
  T v;
  std::memcpy(&v, b.data() + at, sizeof v);
  return v;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "roomswarm_test_io";
  fs::create_directories(dir);
  return dir / name;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("trajectory header of the baseline run") {
  RunConfig cfg;
  const TrajectorySet t = simulate(cfg.params, cfg.fixed, Environment(cfg.room, make_layout(cfg)), cfg.sim);
  const io::Bytes b = io::encode_trajectory(t);
  CHECK(std::string(b.begin(), b.begin() + 4) == "SWRM");
  CHECK(read_le<std::uint16_t>(b, 4) == io::kTrajectoryVersion);
  CHECK(read_le<std::uint32_t>(b, 6) == 49);
  CHECK(read_le<std::uint32_t>(b, 10) == 8);
  CHECK(read_le<std::uint32_t>(b, 14) == 600);
  CHECK(read_le<double>(b, 18) == 0.1);
  CHECK(b.size() == 34 + 49 * 600 * 36 + 8 * 16);
}

TEST_CASE("trajectory round trip") {
  const TrajectorySet t = small_rollout();
  const io::Bytes b = io::encode_trajectory(t);
  TrajectorySet back = io::decode_trajectory(b, t.room);
  back.radius = t.radius;
  CHECK(back == t);
  CHECK(io::encode_trajectory(back) == b);
}

TEST_CASE("truncated and padded trajectories are rejected with a position") {
  const io::Bytes b = io::encode_trajectory(small_rollout());
  for (std::size_t cut : {0ul, 3ul, 5ul, 20ul, 33ul, 34ul, 500ul, b.size() - 1}) {
    CAPTURE(cut);
    const io::Bytes part(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(cut));
    try {
      io::decode_trajectory(part);
      FAIL("expected a format error");
    } catch (const io::FormatError& e) {
      CHECK(e.offset() <= cut);
      CHECK(std::string(e.what()).find("byte") != std::string::npos);
    }
  }
  io::Bytes padded = b;
  padded.push_back(0);
  CHECK_THROWS_AS(io::decode_trajectory(padded), io::FormatError);

  io::Bytes magic = b;
  magic[0] = 'X';
  CHECK_THROWS_AS(io::decode_trajectory(magic), io::FormatError);
  io::Bytes version = b;
  version[4] = 9;
  try {
    io::decode_trajectory(version);
    FAIL("expected a version error");
  } catch (const io::FormatError& e) {
    CHECK(e.offset() == 4);
  }

  // A header promising more data than present must fail before allocating it.
  io::Bytes huge(b.begin(), b.begin() + 34);
  huge[6] = huge[7] = huge[8] = 0xff;
  CHECK_THROWS_AS(io::decode_trajectory(huge), io::FormatError);
}

TEST_CASE("reference table round trip") {
  RunConfig cfg;
  cfg.sim.num_agents = 8;
  cfg.sim.num_steps = 30;
  const BatchContext ctx{cfg.fixed, Environment(cfg.room, make_layout(cfg)), cfg.sim};
  const ReferenceTable t = build_reference_table(cfg.prior, ctx, 25, 77, 1);
  const io::Bytes b = io::encode_table(t);
  CHECK(std::string(b.begin(), b.begin() + 4) == "SWRT");
  CHECK(read_le<std::uint32_t>(b, 6) == 25);
  CHECK(read_le<std::uint32_t>(b, 10) == kSummaryLength);

  const ReferenceTable back = io::decode_table(b);
  CHECK(back.params == t.params);
  CHECK(back.summaries == t.summaries);
  CHECK(back.seeds == t.seeds);
  CHECK(back.beacons == t.beacons);
  CHECK(back.room == t.room);
  CHECK(back.fixed == t.fixed);
  CHECK(back.base_seed == 77);
  CHECK(back.config.num_agents == 8);
  CHECK(back.config.num_steps == 30);
  CHECK(back.config.dt == t.config.dt);
  CHECK(io::encode_table(back) == b);

  for (std::size_t cut : {2ul, 40ul, 100ul, b.size() / 2, b.size() - 1}) {
    const io::Bytes part(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(cut));
    try {
      io::decode_table(part);
      FAIL("expected a format error");
    } catch (const io::FormatError& e) {
      CHECK(e.offset() <= cut);
    }
  }
  io::Bytes padded = b;
  padded.push_back(1);
  CHECK_THROWS_AS(io::decode_table(padded), io::FormatError);
  CHECK_THROWS_AS(io::decode_table(io::encode_trajectory(small_rollout())), io::FormatError);
}

TEST_CASE("atomic writes") {
  const fs::path p = scratch("atomic.bin");
  const io::Bytes data{1, 2, 3, 4, 5};
  io::write_file_atomic(p, data);
  CHECK(io::read_file(p) == data);
  io::write_file_atomic(p, io::Bytes{9});
  CHECK(io::read_file(p) == io::Bytes{9});
  for (const auto& e : fs::directory_iterator(p.parent_path())) {
    CHECK(e.path().filename().string().find(".tmp.") == std::string::npos);
  }
  CHECK_THROWS_AS(io::write_file_atomic(scratch("missing_dir") / "x" / "y.bin", data), io::IoError);
  CHECK_THROWS_AS(io::read_file(scratch("does_not_exist.bin")), io::IoError);
}

TEST_CASE("decimal formatting round-trips") {
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    const double x = (uniform01(rng) - 0.5) * std::pow(10.0, static_cast<int>(uniform01(rng) * 40) - 20);
    CHECK(std::stod(io::format_double(x)) == x);
  }
  CHECK(io::format_double(0.1) == "0.1");
  CHECK(io::format_double(-2.0) == "-2");
}

TEST_CASE("trajectory CSV") {
  const TrajectorySet t = small_rollout(3, 4);
  const std::string csv = io::trajectory_csv(t);
  CHECK(csv.rfind("agent,t,x,y,theta,n,d\n", 0) == 0);
  CHECK(count_lines(csv) == 1 + 3 * 4);
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t k = 0; k < 4; ++k) {
      std::getline(is, line);
      std::istringstream ls(line);
      std::string f[7];
      for (auto& s : f) std::getline(ls, s, ',');
      CHECK(std::stoul(f[0]) == a);
      CHECK(std::stoul(f[1]) == k);
      CHECK(std::stod(f[2]) == t.position(a, k).x);
      CHECK(std::stod(f[3]) == t.position(a, k).y);
      CHECK(std::stod(f[4]) == t.theta[t.at(a, k)]);
      CHECK(std::stoi(f[5]) == t.ncount[t.at(a, k)]);
      CHECK(std::stod(f[6]) == t.dist[t.at(a, k)]);
    }
  }
}

TEST_CASE("beacon CSV") {
  RunConfig cfg;
  const BeaconSet b = make_layout(cfg);
  CHECK(io::parse_beacons_csv(io::beacons_csv(b)) == b);
  CHECK(io::parse_beacons_csv("index,x,y\n0,1.5,-2\n1,3,4\n").positions[1] == Vec2{3, 4});
  CHECK_THROWS_AS(io::parse_beacons_csv("x,y\n1,2\n"), std::invalid_argument);
  CHECK_THROWS_AS(io::parse_beacons_csv("index,x,y\n0,1\n"), std::invalid_argument);
  CHECK_THROWS_AS(io::parse_beacons_csv("index,x,y\n0,a,2\n"), std::invalid_argument);
  CHECK_THROWS_AS(io::parse_beacons_csv("index,x,y\n1,1,2\n"), std::invalid_argument);
}

TEST_CASE("posterior and summary CSV") {
  PosteriorSamples p;
  p.draws = {{0.1, 1.0, 0.5, 0.2}, {0.3, 2.5, 0.25, 0.125}};
  p.weights = {0.75, 0.25};
  const std::string csv = io::posterior_csv(p);
  CHECK(csv == "w,r,v,eta,weight\n0.1,1,0.5,0.2,0.75\n0.3,2.5,0.25,0.125,0.25\n");

  std::vector<SummaryVector> batch(2);
  batch[0].fill(1.0);
  batch[1].fill(2.0);
  const std::string s = io::summaries_csv(batch);
  CHECK(s.rfind("polarization_mean,", 0) == 0);
  CHECK(count_lines(s) == 3);
}

TEST_CASE("configuration parsing") {
  const RunConfig def;
  const RunConfig back = config_from_json(to_json(def));
  CHECK(back.params == def.params);
  CHECK(back.fixed == def.fixed);
  CHECK(back.sim == def.sim);
  CHECK(back.room == def.room);
  CHECK(back.layout_seed == def.layout_seed);

  const RunConfig c = config_from_json(nlohmann::json::parse(R"({"w": 0.8, "A": 10, "seed": 5})"));
  CHECK(c.params.w == 0.8);
  CHECK(c.sim.num_agents == 10);
  CHECK(c.sim.seed == 5);
  CHECK(c.sim.num_steps == 600);

  auto message = [](const std::string& text) {
    try {
      config_from_json(nlohmann::json::parse(text));
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message(R"({"omega": 1})").find("omega") != std::string::npos);
  CHECK(message(R"({"w": "high"})").find("'w'") != std::string::npos);
  CHECK(message(R"({"A": -3})").find("'A'") != std::string::npos);
  CHECK(message(R"({"T": 2.5})").find("'T'") != std::string::npos);
  CHECK(message(R"({"prior": {"w": [1]}})").find("prior.w") != std::string::npos);
  CHECK(message("[1, 2]").find("object") != std::string::npos);

  try {
    parse_json_text("{\n  \"w\": 0.5,\n  \"r\": }\n", "cfg.json");
    FAIL("expected a syntax error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("cfg.json:3:") == 0);
  }

  RunConfig bad;
  bad.params.w = 1.7;
  bad.sim.num_steps = 0;
  try {
    check_config(bad);
    FAIL("expected invalid configuration");
  } catch (const ConfigError& e) {
    const std::string m = e.what();
    CHECK(m.find("0 <= w <= 1") != std::string::npos);
    CHECK(m.find("T must be") != std::string::npos);
  }
  CHECK_NOTHROW(check_config(bad = RunConfig{}));
}

TEST_CASE("config files and manifests") {
  const fs::path p = scratch("cfg.json");
  io::write_text_atomic(p, R"({"v": 0.3, "B": 4})");
  const RunConfig c = load_config(p);
  CHECK(c.params.v == 0.3);
  CHECK(c.sim.num_beacons == 4);

  nlohmann::json m;
  m["command"] = "simulate";
  m["config"] = to_json(c);
  const fs::path mp = scratch("run.manifest.json");
  io::write_text_atomic(mp, m.dump());
  const RunConfig from_manifest = load_config(mp);
  CHECK(from_manifest.params == c.params);
  CHECK(from_manifest.sim == c.sim);

  CHECK_THROWS_AS(load_config(scratch("nope.json")), ConfigError);
  io::write_text_atomic(p, R"({"B": 4, "w": [1]})");
  try {
    load_config(p);
    FAIL("expected a field error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("cfg.json") != std::string::npos);
    CHECK(std::string(e.what()).find("'w'") != std::string::npos);
  }
}

TEST_CASE("beacon layout depends only on room, count and layout seed") {
  RunConfig a, b;
  b.sim.seed = 999;
  CHECK(make_layout(a) == make_layout(b));
  b.layout_seed = 2;
  CHECK_FALSE(make_layout(a) == make_layout(b));
  CHECK(make_layout(a).size() == 8);
}
