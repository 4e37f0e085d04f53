#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "roomswarm/config.hpp"
#include "roomswarm/io.hpp"

#ifndef ROOMSWARM_VERSION
#define ROOMSWARM_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace roomswarm;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 2;
constexpr int kIo = 3;
constexpr int kDegenerate = 4;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raw command-line values; optional members are unset when the flag was not given.
struct Args {
  std::string config;
  std::optional<std::uint64_t> seed;
  int workers = 0;
  std::string out;
  std::optional<double> w, r, v, eta;
  bool quiet = false;

  std::string csv, beacons_csv;        // simulate
  std::size_t rows = 3000;             // table
  std::string summaries_csv;           // table
  std::string table, obs;              // infer, calibrate, recover
  std::string mode = "rejection";      // infer
  double accept_fraction = 0.01;
  std::size_t population = 500, generations = 4;
  double quantile = 0.5;
  std::size_t max_sims = 0;
  std::size_t cases = 300;             // calibrate, recover
  std::string estimator;
  std::size_t prior_draws = 1000;
  std::string traj;                    // stats
  std::string manifest;                // replay
};

class Progress {
 public:
  Progress(std::string label, bool quiet) : label_(std::move(label)), quiet_(quiet) {}
  void operator()(std::size_t done, std::size_t total) {
    if (quiet_ || total == 0) return;
    const std::size_t pct = done * 100 / total;
    if (pct / 10 == last_ / 10 && done != total) return;
    last_ = pct;
    std::fprintf(stderr, "%s: %zu/%zu (%zu%%)\n", label_.c_str(), done, total, pct);
  }

 private:
  std::string label_;
  bool quiet_;
  std::size_t last_ = 1000;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RunConfig resolve_config(const json& opts) {
  RunConfig cfg;
  if (opts.contains("config_inline")) {
    cfg = config_from_json(opts.at("config_inline"));
  } else if (!opts.value("config", std::string()).empty()) {
    cfg = load_config(opts.at("config").get<std::string>());
  }
  if (opts.contains("seed")) cfg.sim.seed = opts.at("seed").get<std::uint64_t>();
  if (opts.contains("w")) cfg.params.w = opts.at("w").get<double>();
  if (opts.contains("r")) cfg.params.r = opts.at("r").get<double>();
  if (opts.contains("v")) cfg.params.v = opts.at("v").get<double>();
  if (opts.contains("eta")) cfg.params.eta = opts.at("eta").get<double>();
  return cfg;
}

std::string required(const json& opts, const char* key) {
  const std::string s = opts.value(key, std::string());
  if (s.empty()) throw UsageError(std::string("missing required option --") + key);
  return s;
}

fs::path manifest_path(const fs::path& out) {
  fs::path m = out;
  m += ".manifest.json";
  return m;
}

void write_manifest(const std::string& command, json opts, const RunConfig& cfg, json seeds, json inputs,
                    json outputs, double wall) {
  opts.erase("config_inline");
  json m;
  m["tool"] = "roomswarm";
  m["version"] = ROOMSWARM_VERSION;
  m["command"] = command;
  m["options"] = opts;
  m["config"] = to_json(cfg);
  m["seeds"] = std::move(seeds);
  m["inputs"] = std::move(inputs);
  m["outputs"] = std::move(outputs);
  m["timings"] = {{"wall_seconds", wall}, {"workers", resolve_workers(opts.value("workers", 0))}};
  const fs::path out = opts.at("out").get<std::string>();
  io::write_text_atomic(manifest_path(out), m.dump(2) + "\n");
}

TrajectorySet read_trajectory(const fs::path& path, const RoomConfig& room) {
  const io::Bytes bytes = io::read_file(path);
  try {
    return io::decode_trajectory(bytes, room);
  } catch (const io::FormatError& e) {
    throw io::IoError(path.string() + ": " + e.what());
  }
}

ReferenceTable read_table(const fs::path& path) {
  const io::Bytes bytes = io::read_file(path);
  try {
    return io::decode_table(bytes);
  } catch (const io::FormatError& e) {
    throw io::IoError(path.string() + ": " + e.what());
  }
}

BatchContext context_of(const ReferenceTable& t) { return {t.fixed, Environment(t.room, t.beacons), t.config}; }

BatchContext context_of(const RunConfig& cfg) { return {cfg.fixed, Environment(cfg.room, make_layout(cfg)), cfg.sim}; }

// The observation must come from the same experiment layout as the table.
void check_compatible(const TrajectorySet& obs, const SimConfig& sim, const BeaconSet& beacons, const char* against) {
  auto fail = [&](const std::string& field, const std::string& a, const std::string& b) {
    throw UsageError("observation does not match the " + std::string(against) + ": field '" + field +
                     "' is " + a + " in the observation but " + b + " in the " + against);
  };
  if (obs.config.num_agents != sim.num_agents) {
    fail("A", std::to_string(obs.config.num_agents), std::to_string(sim.num_agents));
  }
  if (obs.beacons.size() != beacons.size()) {
    fail("B", std::to_string(obs.beacons.size()), std::to_string(beacons.size()));
  }
  if (obs.config.num_steps != sim.num_steps) {
    fail("T", std::to_string(obs.config.num_steps), std::to_string(sim.num_steps));
  }
  if (obs.config.dt != sim.dt) fail("dt", io::format_double(obs.config.dt), io::format_double(sim.dt));
  for (std::size_t b = 0; b < beacons.size(); ++b) {
    if (!(obs.beacons.positions[b] == beacons.positions[b])) {
      fail("beacons", "beacon " + std::to_string(b) + " elsewhere", "a different layout");
    }
  }
}

int cmd_simulate(const json& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig cfg = resolve_config(opts);
  check_config(cfg);
  const fs::path out = required(opts, "out");
  const BeaconSet beacons = make_layout(cfg);
  const TrajectorySet traj = simulate(cfg.params, cfg.fixed, Environment(cfg.room, beacons), cfg.sim);
  io::write_file_atomic(out, io::encode_trajectory(traj));
  json outputs = json::array({out.string()});
  if (const std::string csv = opts.value("csv", std::string()); !csv.empty()) {
    io::write_text_atomic(csv, io::trajectory_csv(traj));
    outputs.push_back(csv);
  }
  if (const std::string bc = opts.value("beacons_csv", std::string()); !bc.empty()) {
    io::write_text_atomic(bc, io::beacons_csv(beacons));
    outputs.push_back(bc);
  }
  write_manifest("simulate", opts, cfg, {{"rollout", cfg.sim.seed}, {"layout", cfg.layout_seed}}, json::array(),
                 outputs, seconds_since(t0));
  return kOk;
}

int cmd_table(const json& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig cfg = resolve_config(opts);
  check_config(cfg, false);
  const fs::path out = required(opts, "out");
  const std::size_t rows = opts.at("rows").get<std::size_t>();
  if (rows < 2) throw UsageError("--rows must be at least 2");
  Progress progress("table", opts.value("quiet", false));
  const ReferenceTable table = build_reference_table(cfg.prior, context_of(cfg), rows, cfg.sim.seed,
                                                     opts.value("workers", 0), std::ref(progress));
  io::write_file_atomic(out, io::encode_table(table));
  json outputs = json::array({out.string()});
  if (const std::string csv = opts.value("summaries_csv", std::string()); !csv.empty()) {
    io::write_text_atomic(csv, io::summaries_csv(table.summaries));
    outputs.push_back(csv);
  }
  write_manifest("table", opts, cfg, {{"table_base", cfg.sim.seed}, {"layout", cfg.layout_seed}}, json::array(),
                 outputs, seconds_since(t0));
  return kOk;
}

SmcSchedule schedule_of(const json& opts) {
  SmcSchedule s;
  s.population = opts.at("population").get<std::size_t>();
  s.generations = opts.at("generations").get<std::size_t>();
  s.quantile = opts.at("quantile").get<double>();
  s.max_simulations_per_generation = opts.at("max_sims").get<std::size_t>();
  if (s.population < 2) throw UsageError("--population must be at least 2");
  if (s.generations < 1) throw UsageError("--generations must be at least 1");
  if (!(s.quantile > 0.0 && s.quantile < 1.0)) throw UsageError("--quantile must lie in (0, 1)");
  return s;
}

int cmd_infer(const json& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig cfg = resolve_config(opts);
  const fs::path out = required(opts, "out");
  const fs::path obs_path = required(opts, "obs");
  const std::string mode = opts.at("mode").get<std::string>();
  const std::string table_path = opts.value("table", std::string());
  const int workers = opts.value("workers", 0);
  json inputs = json::array({obs_path.string()});

  PosteriorSamples posterior;
  json extra;
  if (mode == "rejection") {
    if (table_path.empty()) throw UsageError("rejection mode needs --table");
    const double frac = opts.at("accept_fraction").get<double>();
    if (!(frac > 0.0 && frac <= 1.0)) throw UsageError("--accept-fraction must lie in (0, 1]");
    const ReferenceTable table = read_table(table_path);
    const TrajectorySet obs = read_trajectory(obs_path, table.room);
    check_compatible(obs, table.config, table.beacons, "table");
    posterior = abc_rejection(summarize(augment(obs)), table, frac);
    inputs.push_back(table_path);
  } else if (mode == "smc") {
    const SmcSchedule sch = schedule_of(opts);
    SmcResult res;
    try {
      if (!table_path.empty()) {
        const ReferenceTable table = read_table(table_path);
        const TrajectorySet obs = read_trajectory(obs_path, table.room);
        check_compatible(obs, table.config, table.beacons, "table");
        res = abc_smc_from_table(summarize(augment(obs)), table, context_of(table), sch, cfg.sim.seed, workers);
        inputs.push_back(table_path);
      } else {
        check_config(cfg, false);
        const BatchContext ctx = context_of(cfg);
        const TrajectorySet obs = read_trajectory(obs_path, cfg.room);
        check_compatible(obs, ctx.config, ctx.env.beacons, "configuration");
        res = abc_smc(summarize(augment(obs)), cfg.prior, ctx, sch, cfg.sim.seed, workers);
      }
    } catch (const DegenerateGeneration& e) {
      throw NumericalError(e.what());
    }
    posterior = std::move(res.posterior);
    extra["tolerances"] = res.tolerances;
    extra["simulations"] = res.simulations;
  } else {
    throw UsageError("--mode must be 'rejection' or 'smc'");
  }
  io::write_text_atomic(out, io::posterior_csv(posterior));
  json seeds = {{"smc_base", cfg.sim.seed}};
  if (!extra.is_null()) seeds["schedule"] = extra;
  write_manifest("infer", opts, cfg, seeds, inputs, json::array({out.string()}), seconds_since(t0));
  return kOk;
}

int cmd_study(const std::string& command, const json& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig cfg = resolve_config(opts);
  const fs::path out = required(opts, "out");
  StudySettings st;
  st.estimator = estimator_from_string(opts.at("estimator").get<std::string>());
  st.cases = opts.at("cases").get<std::size_t>();
  if (st.cases < 2) throw UsageError("--cases (S) must be at least 2, got " + std::to_string(st.cases));
  st.accept_fraction = opts.at("accept_fraction").get<double>();
  if (!(st.accept_fraction > 0.0 && st.accept_fraction <= 1.0)) {
    throw UsageError("--accept-fraction must lie in (0, 1]");
  }
  if (st.estimator == Estimator::smc) st.smc = schedule_of(opts);
  st.prior_draws = opts.at("prior_draws").get<std::size_t>();
  if (st.prior_draws < 2) throw UsageError("--prior-draws must be at least 2");
  st.base_seed = cfg.sim.seed;
  st.workers = opts.value("workers", 0);

  const std::string table_path = opts.value("table", std::string());
  json inputs = json::array();
  ReferenceTable table;
  BatchContext ctx = context_of(cfg);
  if (!table_path.empty()) {
    table = read_table(table_path);
    ctx = context_of(table);
    inputs.push_back(table_path);
  } else if (st.estimator == Estimator::prior) {
    check_config(cfg, false);
    table.prior = cfg.prior;
    table.config = cfg.sim;
    table.room = cfg.room;
    table.fixed = cfg.fixed;
    table.beacons = ctx.env.beacons;
  } else {
    throw UsageError("the " + to_string(st.estimator) + " estimator needs --table");
  }

  Progress progress(command, opts.value("quiet", false));
  StudyResult res;
  try {
    res = run_recovery_study(table, ctx, st, std::ref(progress));
  } catch (const StudyCaseError& e) {
    if (e.degenerate()) throw NumericalError(e.what());
    throw;
  }
  fs::path stem = out;
  stem.replace_extension();
  const fs::path cov = stem.string() + ".coverage.csv";
  const fs::path rec = stem.string() + ".recovery.csv";
  io::write_text_atomic(out, to_json(res.report).dump(2) + "\n");
  io::write_text_atomic(cov, io::coverage_csv(res.report));
  io::write_text_atomic(rec, io::recovery_csv(res.report));
  write_manifest(command, opts, cfg, {{"study_base", st.base_seed}}, inputs,
                 json::array({out.string(), cov.string(), rec.string()}), seconds_since(t0));
  return kOk;
}

int cmd_stats(const json& opts) {
  const RunConfig cfg = resolve_config(opts);
  const fs::path path = required(opts, "traj");
  const TrajectorySet traj = read_trajectory(path, cfg.room);
  const SummaryVector s = summarize(augment(traj));
  std::string text;
  for (std::size_t i = 0; i < kSummaryLength; ++i) {
    text += std::string(kSummaryLabels[i]) + "," + io::format_double(s[i]) + "\n";
  }
  if (const std::string out = opts.value("out", std::string()); !out.empty()) {
    io::write_text_atomic(out, "statistic,value\n" + text);
  } else {
    std::cout << "statistic,value\n" << text;
  }
  return kOk;
}

int dispatch(const std::string& command, const json& opts) {
  if (command == "simulate") return cmd_simulate(opts);
  if (command == "table") return cmd_table(opts);
  if (command == "infer") return cmd_infer(opts);
  if (command == "calibrate" || command == "recover") return cmd_study(command, opts);
  if (command == "stats") return cmd_stats(opts);
  throw UsageError("unknown command '" + command + "'");
}

// Re-runs a manifest with its recorded configuration; --out redirects the outputs.
int cmd_replay(const Args& a) {
  const io::Bytes bytes = io::read_file(a.manifest);
  const json m = parse_json_text(std::string(bytes.begin(), bytes.end()), a.manifest);
  if (!m.is_object() || !m.contains("command") || !m.contains("options") || !m.contains("config")) {
    throw UsageError(a.manifest + ": not a run manifest");
  }
  json opts = m.at("options");
  opts["config_inline"] = m.at("config");
  opts.erase("config");
  for (const char* k : {"seed", "w", "r", "v", "eta"}) opts.erase(k);
  if (!a.out.empty()) opts["out"] = a.out;
  if (a.workers > 0) opts["workers"] = a.workers;
  opts["quiet"] = a.quiet;
  return dispatch(m.at("command").get<std::string>(), opts);
}

json to_options(const Args& a, const std::string& command) {
  json o;
  o["config"] = a.config;
  if (a.seed) o["seed"] = *a.seed;
  o["workers"] = a.workers;
  o["out"] = a.out;
  if (a.w) o["w"] = *a.w;
  if (a.r) o["r"] = *a.r;
  if (a.v) o["v"] = *a.v;
  if (a.eta) o["eta"] = *a.eta;
  o["quiet"] = a.quiet;
  if (command == "simulate") {
    o["csv"] = a.csv;
    o["beacons_csv"] = a.beacons_csv;
  } else if (command == "table") {
    o["rows"] = a.rows;
    o["summaries_csv"] = a.summaries_csv;
  } else if (command == "infer" || command == "calibrate" || command == "recover") {
    o["table"] = a.table;
    o["accept_fraction"] = a.accept_fraction;
    o["population"] = a.population;
    o["generations"] = a.generations;
    o["quantile"] = a.quantile;
    o["max_sims"] = a.max_sims;
    if (command == "infer") {
      o["obs"] = a.obs;
      o["mode"] = a.mode;
    } else {
      o["cases"] = a.cases;
      o["prior_draws"] = a.prior_draws;
      o["estimator"] = a.estimator.empty() ? (command == "recover" ? "smc" : "rejection") : a.estimator;
    }
  } else if (command == "stats") {
    o["traj"] = a.traj;
  }
  return o;
}

void add_common(CLI::App* sub, Args& a, bool params) {
  sub->add_option("--config", a.config, "JSON configuration or run manifest");
  sub->add_option("--seed", a.seed, "base seed (overrides the config seed)");
  sub->add_option("--workers", a.workers, "worker threads (default: ROOMSWARM_WORKERS or all cores)")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--out", a.out, "output path");
  sub->add_flag("--quiet", a.quiet, "no progress on stderr");
  if (params) {
    sub->add_option("--w", a.w, "external weight in [0, 1]");
    sub->add_option("--r", a.r, "sensing radius > 0");
    sub->add_option("--v", a.v, "speed in (0, 1)");
    sub->add_option("--eta", a.eta, "alignment noise in (0, 1)");
  }
}

void add_inference(CLI::App* sub, Args& a) {
  sub->add_option("--table", a.table, "reference table file");
  sub->add_option("--accept-fraction", a.accept_fraction, "rejection acceptance fraction");
  sub->add_option("--population", a.population, "SMC population M");
  sub->add_option("--generations", a.generations, "SMC generations G");
  sub->add_option("--quantile", a.quantile, "SMC tolerance quantile q");
  sub->add_option("--max-sims", a.max_sims, "SMC simulation cap per generation (0: 200 M)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Room-scale swarm simulator and likelihood-free inference"};
  app.set_version_flag("--version", ROOMSWARM_VERSION);
  app.require_subcommand(1);
  Args a;

  auto* sim = app.add_subcommand("simulate", "run one rollout and write a trajectory file");
  add_common(sim, a, true);
  sim->add_option("--csv", a.csv, "also write the trajectory as CSV");
  sim->add_option("--beacons-csv", a.beacons_csv, "also write the beacon layout as CSV");

  auto* table = app.add_subcommand("table", "build a reference table of prior draws and summaries");
  add_common(table, a, false);
  table->add_option("--rows", a.rows, "number of rows N");
  table->add_option("--summaries-csv", a.summaries_csv, "also write the summaries as CSV");

  auto* infer = app.add_subcommand("infer", "posterior samples for an observed trajectory");
  add_common(infer, a, false);
  add_inference(infer, a);
  infer->add_option("--obs", a.obs, "observed trajectory file")->required();
  infer->add_option("--mode", a.mode, "rejection or smc");

  auto* calibrate = app.add_subcommand("calibrate", "coverage study (default estimator: rejection)");
  auto* recover = app.add_subcommand("recover", "recovery study (default estimator: smc)");
  for (auto* sub : {calibrate, recover}) {
    add_common(sub, a, false);
    add_inference(sub, a);
    sub->add_option("--cases,-S", a.cases, "number of test cases S");
    sub->add_option("--estimator", a.estimator, "rejection, smc or prior");
    sub->add_option("--prior-draws", a.prior_draws, "draws per case for the prior estimator");
  }

  auto* stats = app.add_subcommand("stats", "print the summary vector of a trajectory");
  add_common(stats, a, false);
  stats->add_option("traj", a.traj, "trajectory file")->required();

  auto* replay = app.add_subcommand("replay", "re-run the command recorded in a manifest");
  replay->add_option("manifest", a.manifest, "run manifest")->required();
  replay->add_option("--out", a.out, "redirect the primary output");
  replay->add_option("--workers", a.workers, "worker threads")->check(CLI::NonNegativeNumber);
  replay->add_flag("--quiet", a.quiet, "no progress on stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    CLI::App* chosen = app.get_subcommands().front();
    if (chosen == replay) return cmd_replay(a);
    return dispatch(chosen->get_name(), to_options(a, chosen->get_name()));
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const io::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const NumericalError& e) {
    std::cerr << "error: numerical degeneracy: " << e.what() << "\n";
    return kDegenerate;
  } catch (const BatchError& e) {
    std::cerr << "error: simulation failed: " << e.what() << "\n";
    return kDegenerate;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
