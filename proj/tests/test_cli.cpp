#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "roomswarm/config.hpp"
#include "roomswarm/io.hpp"

using namespace roomswarm;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string output;  // stdout and stderr
};

Run cli(const std::string& args) {
  const std::string cmd = std::string("\"") + ROOMSWARM_CLI + "\" " + args + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe)) out += buf.data();
  const int status = ::pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

const fs::path& dir() {
  static const fs::path d = [] {
    const fs::path p = fs::temp_directory_path() / "roomswarm_test_cli";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return d;
}

std::string p(const std::string& name) { return (dir() / name).string(); }

std::string small_config() {
  const std::string path = p("small.json");
  if (!fs::exists(path)) io::write_text_atomic(path, "{\"A\": 12, \"T\": 60}\n");
  return path;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

template <class T>
T read_le(const io::Bytes& b, std::size_t at) {
  T v;
  std::memcpy(&v, b.data() + at, sizeof v);
  return v;
}

}  // namespace

TEST_CASE("simulate with defaults") {
  REQUIRE(cli("simulate --seed 7 --out " + p("d1.bin")).code == 0);
  REQUIRE(cli("simulate --seed 7 --out " + p("d2.bin")).code == 0);
  const io::Bytes b = io::read_file(p("d1.bin"));
  CHECK(read_le<std::uint32_t>(b, 6) == 49);
  CHECK(read_le<std::uint32_t>(b, 10) == 8);
  CHECK(read_le<std::uint32_t>(b, 14) == 600);
  CHECK(read_le<double>(b, 18) == 0.1);
  CHECK(b == io::read_file(p("d2.bin")));

  const auto manifest = nlohmann::json::parse(slurp(p("d1.bin.manifest.json")));
  CHECK(manifest["command"] == "simulate");
  CHECK(manifest["config"]["seed"] == 7);
  CHECK(manifest["config"]["A"] == 49);
  CHECK(manifest.contains("version"));
  CHECK(manifest["timings"].contains("wall_seconds"));
}

TEST_CASE("configuration errors exit with 2") {
  const Run w = cli("simulate --w 1.7 --out " + p("bad.bin"));
  CHECK(w.code == 2);
  CHECK(w.output.find("0 <= w <= 1") != std::string::npos);
  CHECK_FALSE(fs::exists(p("bad.bin")));

  io::write_text_atomic(p("broken.json"), "{\n  \"A\": 10,\n  \"T\": ,\n}\n");
  const Run syntax = cli("simulate --config " + p("broken.json") + " --out " + p("bad.bin"));
  CHECK(syntax.code == 2);
  CHECK(syntax.output.find("broken.json:3:") != std::string::npos);

  io::write_text_atomic(p("unknown.json"), "{\"gamma\": 1}");
  const Run unknown = cli("simulate --config " + p("unknown.json") + " --out " + p("bad.bin"));
  CHECK(unknown.code == 2);
  CHECK(unknown.output.find("gamma") != std::string::npos);

  CHECK(cli("simulate --out " + p("bad.bin") + " --workers -1").code == 2);
  CHECK(cli("nonsense").code == 2);
  CHECK(cli("").code == 2);
  CHECK(cli("simulate").code == 2);
}

TEST_CASE("I/O errors exit with 3") {
  CHECK(cli("simulate --out " + p("no/such/dir/x.bin")).code == 3);
  CHECK(cli("stats " + p("missing.bin")).code == 3);
  REQUIRE(cli("simulate --config " + small_config() + " --out " + p("cut.bin")).code == 0);
  io::Bytes b = io::read_file(p("cut.bin"));
  b.resize(b.size() / 2);
  io::write_file_atomic(p("cut.bin"), b);
  const Run r = cli("stats " + p("cut.bin") + " --config " + small_config());
  CHECK(r.code == 3);
  CHECK(r.output.find("byte") != std::string::npos);
}

TEST_CASE("table is independent of the worker count") {
  const std::string cfg = small_config();
  REQUIRE(cli("table --config " + cfg + " --rows 40 --seed 3 --workers 1 --quiet --out " + p("t1.bin")).code == 0);
  const Run eight = cli("table --config " + cfg + " --rows 40 --seed 3 --workers 8 --out " + p("t8.bin"));
  REQUIRE(eight.code == 0);
  CHECK(eight.output.find("table: 40/40") != std::string::npos);
  const io::Bytes b = io::read_file(p("t1.bin"));
  CHECK(b == io::read_file(p("t8.bin")));
  CHECK(read_le<std::uint32_t>(b, 6) == 40);
  for (const auto& e : fs::directory_iterator(dir())) {
    CHECK(e.path().filename().string().find(".tmp.") == std::string::npos);
  }
}

TEST_CASE("infer") {
  const std::string cfg = small_config();
  REQUIRE(cli("table --config " + cfg + " --rows 50 --seed 5 --quiet --out " + p("it.bin")).code == 0);
  REQUIRE(cli("simulate --config " + cfg + " --seed 8 --out " + p("obs.bin")).code == 0);

  REQUIRE(cli("infer --table " + p("it.bin") + " --obs " + p("obs.bin") + " --accept-fraction 1 --out " +
              p("all.csv")).code == 0);
  CHECK(lines(slurp(p("all.csv"))) == 1 + 50);

  io::write_text_atomic(p("dt.json"), "{\"A\": 12, \"T\": 60, \"dt\": 0.05}");
  REQUIRE(cli("simulate --config " + p("dt.json") + " --out " + p("obs_dt.bin")).code == 0);
  const Run dt = cli("infer --table " + p("it.bin") + " --obs " + p("obs_dt.bin") + " --out " + p("x.csv"));
  CHECK(dt.code == 2);
  CHECK(dt.output.find("'dt'") != std::string::npos);

  io::write_text_atomic(p("a.json"), "{\"A\": 13, \"T\": 60}");
  REQUIRE(cli("simulate --config " + p("a.json") + " --out " + p("obs_a.bin")).code == 0);
  const Run a = cli("infer --table " + p("it.bin") + " --obs " + p("obs_a.bin") + " --out " + p("x.csv"));
  CHECK(a.code == 2);
  CHECK(a.output.find("'A'") != std::string::npos);
}

TEST_CASE("SMC with one generation equals rejection given the same seeds") {
  const std::string cfg = small_config();
  REQUIRE(cli("simulate --config " + cfg + " --seed 8 --out " + p("obs1.bin")).code == 0);
  REQUIRE(cli("infer --mode smc --config " + cfg + " --obs " + p("obs1.bin") +
              " --population 20 --generations 1 --quantile 0.5 --seed 41 --out " + p("smc.csv")).code == 0);
  const std::uint64_t table_seed = smc_initial_table_seed(41);
  REQUIRE(cli("table --config " + cfg + " --rows 40 --quiet --seed " + std::to_string(table_seed) + " --out " +
              p("g0.bin")).code == 0);
  REQUIRE(cli("infer --table " + p("g0.bin") + " --obs " + p("obs1.bin") + " --accept-fraction 0.5 --out " +
              p("rej.csv")).code == 0);
  CHECK(slurp(p("smc.csv")) == slurp(p("rej.csv")));
  CHECK(lines(slurp(p("smc.csv"))) == 21);
}

TEST_CASE("numerical degeneracy exits with 4") {
  const std::string cfg = small_config();
  REQUIRE(cli("table --config " + cfg + " --rows 40 --seed 6 --quiet --out " + p("dg.bin")).code == 0);
  REQUIRE(cli("simulate --config " + cfg + " --seed 2 --out " + p("dg_obs.bin")).code == 0);
  const Run r = cli("infer --mode smc --table " + p("dg.bin") + " --obs " + p("dg_obs.bin") +
                    " --population 20 --generations 2 --max-sims 5 --out " + p("dg.csv"));
  CHECK(r.code == 4);
  CHECK(r.output.find("degenera") != std::string::npos);
}

TEST_CASE("calibrate and recover") {
  const std::string cfg = small_config();
  REQUIRE(cli("table --config " + cfg + " --rows 60 --seed 9 --quiet --out " + p("ct.bin")).code == 0);
  CHECK(cli("calibrate --table " + p("ct.bin") + " --cases 0 --out " + p("c0.json")).code == 2);
  const std::string base = "calibrate --quiet --table " + p("ct.bin") + " --cases 12 --accept-fraction 0.2 --seed 4";
  REQUIRE(cli(base + " --out " + p("c1.json")).code == 0);
  REQUIRE(cli(base + " --workers 3 --out " + p("c2.json")).code == 0);
  CHECK(slurp(p("c1.json")) == slurp(p("c2.json")));
  CHECK(slurp(p("c1.coverage.csv")) == slurp(p("c2.coverage.csv")));
  CHECK(lines(slurp(p("c1.coverage.csv"))) == 1 + 4 * 20);
  CHECK(lines(slurp(p("c1.recovery.csv"))) == 1 + 4 * 12);

  const auto report = nlohmann::json::parse(slurp(p("c1.json")));
  CHECK(report["cases"] == 12);
  for (const char* name : {"w", "r", "v", "eta"}) {
    const auto& q = report["parameters"][name];
    CHECK(q.contains("ece"));
    CHECK(q.contains("nrmse"));
    CHECK(q.contains("posterior_contraction"));
    CHECK(q.contains("recovery_correlation"));
  }

  REQUIRE(cli("recover --quiet --table " + p("ct.bin") + " --cases 3 --population 10 --generations 2 --out " +
              p("r.json")).code == 0);
  CHECK(nlohmann::json::parse(slurp(p("r.json")))["estimator"] == "smc");
  CHECK(cli("recover --table " + p("ct.bin") + " --estimator flow --out " + p("r2.json")).code == 2);
}

TEST_CASE("every command replays from its manifest") {
  const std::string cfg = small_config();
  REQUIRE(cli("simulate --config " + cfg + " --seed 5 --v 0.7 --out " + p("m.bin")).code == 0);
  REQUIRE(cli("replay " + p("m.bin.manifest.json") + " --out " + p("m_again.bin")).code == 0);
  CHECK(io::read_file(p("m.bin")) == io::read_file(p("m_again.bin")));

  REQUIRE(cli("table --config " + cfg + " --rows 30 --seed 2 --quiet --out " + p("mt.bin")).code == 0);
  REQUIRE(cli("replay --quiet " + p("mt.bin.manifest.json") + " --out " + p("mt_again.bin")).code == 0);
  CHECK(io::read_file(p("mt.bin")) == io::read_file(p("mt_again.bin")));

  REQUIRE(cli("simulate --config " + cfg + " --seed 6 --out " + p("mo.bin")).code == 0);
  REQUIRE(cli("infer --mode smc --table " + p("mt.bin") + " --obs " + p("mo.bin") +
              " --population 10 --generations 2 --seed 3 --out " + p("mi.csv")).code == 0);
  REQUIRE(cli("replay " + p("mi.csv.manifest.json") + " --out " + p("mi_again.csv")).code == 0);
  CHECK(slurp(p("mi.csv")) == slurp(p("mi_again.csv")));

  REQUIRE(cli("calibrate --quiet --table " + p("mt.bin") + " --cases 5 --accept-fraction 0.3 --out " + p("mc.json"))
              .code == 0);
  REQUIRE(cli("replay --quiet " + p("mc.json.manifest.json") + " --out " + p("mc_again.json")).code == 0);
  CHECK(slurp(p("mc.json")) == slurp(p("mc_again.json")));

  // The manifest also works as a plain --config.
  REQUIRE(cli("simulate --config " + p("m.bin.manifest.json") + " --out " + p("m_cfg.bin")).code == 0);
  CHECK(io::read_file(p("m.bin")) == io::read_file(p("m_cfg.bin")));
}

TEST_CASE("stats prints the summary vector") {
  REQUIRE(cli("simulate --config " + small_config() + " --seed 1 --out " + p("st.bin")).code == 0);
  const Run r = cli("stats " + p("st.bin") + " --config " + small_config());
  REQUIRE(r.code == 0);
  CHECK(lines(r.output) == 1 + kSummaryLength);
  CHECK(r.output.rfind("statistic,value\npolarization_mean,", 0) == 0);
  CHECK(r.output == cli("stats " + p("st.bin") + " --config " + small_config()).output);
}

TEST_CASE("worker count from the environment") {
  REQUIRE(cli("table --config " + small_config() + " --rows 20 --seed 3 --quiet --out " + p("e1.bin")).code == 0);
  REQUIRE(cli("table --config " + small_config() + " --rows 20 --seed 3 --quiet --out " + p("e2.bin")).code == 0);
  const std::string env = "ROOMSWARM_WORKERS=3 ";
  const std::string cmd = env + "\"" + ROOMSWARM_CLI + "\" table --config " + small_config() +
                          " --rows 20 --seed 3 --quiet --out " + p("e3.bin");
  REQUIRE(std::system(cmd.c_str()) == 0);
  CHECK(io::read_file(p("e1.bin")) == io::read_file(p("e3.bin")));
  CHECK(nlohmann::json::parse(slurp(p("e1.bin.manifest.json")))["options"]["workers"] == 0);
  CHECK(nlohmann::json::parse(slurp(p("e3.bin.manifest.json")))["timings"]["workers"] == 3);
}
