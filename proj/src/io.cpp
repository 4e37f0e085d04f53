#include "roomswarm/io.hpp"

#include <unistd.h>

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

namespace roomswarm::io {

namespace {

class Writer {
 public:
  explicit Writer(Bytes& out) : out_(out) {}

  void raw(const char* s, std::size_t n) { out_.insert(out_.end(), s, s + n); }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void i32(std::int32_t v) { put(static_cast<std::uint32_t>(v), 4); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  Bytes& out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  void expect_magic(const char (&magic)[5], const char* what) {
    need(4, "magic");
    if (std::memcmp(in_.data() + pos_, magic, 4) != 0) {
      throw FormatError(pos_, std::string("not a ") + what + " file (bad magic)");
    }
    pos_ += 4;
  }
  std::uint8_t u8() { need(1, "u8"); return in_[pos_++]; }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2, "u16")); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4, "u32")); }
  std::uint64_t u64() { return get(8, "u64"); }
  std::int32_t i32() { return static_cast<std::int32_t>(static_cast<std::uint32_t>(get(4, "i32"))); }
  double f64() { return std::bit_cast<double>(get(8, "f64")); }

  /// Validates that `count` elements of `width` bytes remain before allocating.
  void need_elements(std::uint64_t count, std::size_t width, const char* what) {
    const std::uint64_t remaining = in_.size() - pos_;
    if (count > remaining / width) {
      throw FormatError(pos_, std::string("truncated file: ") + what + " needs " +
                                  std::to_string(count * width) + " bytes, " +
                                  std::to_string(remaining) + " remain");
    }
  }
  void expect_end() {
    if (pos_ != in_.size()) throw FormatError(pos_, "trailing bytes after end of data");
  }
  std::size_t position() const { return pos_; }

 private:
  void need(std::size_t n, const char* what) {
    if (in_.size() - pos_ < n) {
      throw FormatError(pos_, std::string("truncated file while reading ") + what);
    }
  }
  std::uint64_t get(std::size_t n, const char* what) {
    need(n, what);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
    pos_ += n;
    return v;
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

Bytes encode_trajectory(const TrajectorySet& traj) {
  const std::size_t n = traj.agents() * traj.steps();
  if (traj.x.size() != 2 * n || traj.theta.size() != n || traj.dist.size() != n || traj.ncount.size() != n) {
    throw std::invalid_argument("trajectory arrays do not match A*T");
  }
  Bytes out;
  out.reserve(36 + n * 36 + traj.beacons.size() * 16);
  Writer w(out);
  w.raw("SWRM", 4);
  w.u16(kTrajectoryVersion);
  w.u32(traj.config.num_agents);
  w.u32(static_cast<std::uint32_t>(traj.beacons.size()));
  w.u32(traj.config.num_steps);
  w.f64(traj.config.dt);
  w.u64(traj.config.seed);
  for (double v : traj.x) w.f64(v);
  for (double v : traj.theta) w.f64(v);
  for (double v : traj.dist) w.f64(v);
  for (std::int32_t v : traj.ncount) w.i32(v);
  for (const Vec2& b : traj.beacons.positions) {
    w.f64(b.x);
    w.f64(b.y);
  }
  return out;
}

TrajectorySet decode_trajectory(std::span<const std::uint8_t> bytes, const RoomConfig& room) {
  Reader r(bytes);
  r.expect_magic("SWRM", "trajectory");
  const std::size_t version_at = r.position();
  const std::uint16_t version = r.u16();
  if (version != kTrajectoryVersion) {
    throw FormatError(version_at, "unsupported trajectory format version " + std::to_string(version));
  }
  TrajectorySet traj;
  traj.room = room;
  traj.config.num_agents = r.u32();
  traj.config.num_beacons = r.u32();
  traj.config.num_steps = r.u32();
  traj.config.dt = r.f64();
  traj.config.seed = r.u64();

  const std::uint64_t n = std::uint64_t{traj.config.num_agents} * traj.config.num_steps;
  r.need_elements(n, 36, "observable arrays");
  traj.resize();
  for (double& v : traj.x) v = r.f64();
  for (double& v : traj.theta) v = r.f64();
  for (double& v : traj.dist) v = r.f64();
  for (std::int32_t& v : traj.ncount) v = r.i32();
  r.need_elements(traj.config.num_beacons, 16, "beacon block");
  traj.beacons.positions.resize(traj.config.num_beacons);
  for (Vec2& b : traj.beacons.positions) {
    b.x = r.f64();
    b.y = r.f64();
  }
  r.expect_end();
  return traj;
}

Bytes encode_table(const ReferenceTable& t) {
  const std::size_t N = t.size();
  if (t.summaries.size() != N || t.seeds.size() != N) throw std::invalid_argument("reference table blocks disagree in length");
  Bytes out;
  out.reserve(128 + N * (8 * (kNumParams + kSummaryLength) + 8));
  Writer w(out);
  w.raw("SWRT", 4);
  w.u16(kTableVersion);
  w.u32(static_cast<std::uint32_t>(N));
  w.u32(static_cast<std::uint32_t>(kSummaryLength));
  w.u32(t.config.num_agents);
  w.u32(static_cast<std::uint32_t>(t.beacons.size()));
  w.u32(t.config.num_steps);
  w.f64(t.config.dt);
  w.u64(t.base_seed);
  w.u8(t.config.reassign_beacons ? 1 : 0);
  w.f64(t.room.width);
  w.f64(t.room.height);
  w.f64(t.room.detection_range);
  w.f64(t.fixed.kappa);
  w.f64(t.fixed.sigma);
  for (double v : {t.prior.w.alpha, t.prior.w.beta, t.prior.r.mu, t.prior.r.s, t.prior.v.alpha, t.prior.v.beta,
                   t.prior.eta.alpha, t.prior.eta.beta}) {
    w.f64(v);
  }
  for (const auto& p : t.params) {
    for (double v : to_array(p)) w.f64(v);
  }
  for (const auto& s : t.summaries) {
    for (double v : s) w.f64(v);
  }
  for (std::uint64_t s : t.seeds) w.u64(s);
  for (const Vec2& b : t.beacons.positions) {
    w.f64(b.x);
    w.f64(b.y);
  }
  return out;
}

ReferenceTable decode_table(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  r.expect_magic("SWRT", "reference table");
  const std::size_t version_at = r.position();
  const std::uint16_t version = r.u16();
  if (version != kTableVersion) {
    throw FormatError(version_at, "unsupported reference table version " + std::to_string(version));
  }
  ReferenceTable t;
  const std::uint32_t N = r.u32();
  const std::size_t k_at = r.position();
  const std::uint32_t K = r.u32();
  if (K != kSummaryLength) {
    throw FormatError(k_at, "summary length " + std::to_string(K) + " does not match this build (" +
                                std::to_string(kSummaryLength) + ")");
  }
  t.config.num_agents = r.u32();
  t.config.num_beacons = r.u32();
  t.config.num_steps = r.u32();
  t.config.dt = r.f64();
  t.base_seed = r.u64();
  t.config.seed = t.base_seed;
  t.config.reassign_beacons = r.u8() != 0;
  t.room.width = r.f64();
  t.room.height = r.f64();
  t.room.detection_range = r.f64();
  t.fixed.kappa = r.f64();
  t.fixed.sigma = r.f64();
  t.prior.w = {r.f64(), r.f64()};
  t.prior.r = {r.f64(), r.f64()};
  t.prior.v = {r.f64(), r.f64()};
  t.prior.eta = {r.f64(), r.f64()};

  r.need_elements(N, 8 * (kNumParams + kSummaryLength) + 8, "row blocks");
  t.params.resize(N);
  for (auto& p : t.params) {
    std::array<double, kNumParams> a{};
    for (double& v : a) v = r.f64();
    p = from_array(a);
  }
  t.summaries.resize(N);
  for (auto& s : t.summaries) {
    for (double& v : s) v = r.f64();
  }
  t.seeds.resize(N);
  for (auto& s : t.seeds) s = r.u64();
  r.need_elements(t.config.num_beacons, 16, "beacon block");
  t.beacons.positions.resize(t.config.num_beacons);
  for (Vec2& b : t.beacons.positions) {
    b.x = r.f64();
    b.y = r.f64();
  }
  r.expect_end();
  return t;
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read error on '" + path.string() + "'");
  return data;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("write error on '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place at '" + path.string() + "'");
  }
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string trajectory_csv(const TrajectorySet& traj) {
  std::ostringstream os;
  os << "agent,t,x,y,theta,n,d\n";
  for (std::size_t a = 0; a < traj.agents(); ++a) {
    for (std::size_t t = 0; t < traj.steps(); ++t) {
      const std::size_t k = traj.at(a, t);
      os << a << ',' << t << ',' << format_double(traj.x[2 * k]) << ',' << format_double(traj.x[2 * k + 1]) << ','
         << format_double(traj.theta[k]) << ',' << traj.ncount[k] << ',' << format_double(traj.dist[k]) << '\n';
    }
  }
  return os.str();
}

std::string beacons_csv(const BeaconSet& beacons) {
  std::ostringstream os;
  os << "index,x,y\n";
  for (std::size_t i = 0; i < beacons.size(); ++i) {
    os << i << ',' << format_double(beacons.positions[i].x) << ',' << format_double(beacons.positions[i].y) << '\n';
  }
  return os.str();
}

BeaconSet parse_beacons_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line.rfind("index,x,y", 0) != 0) {
    throw std::invalid_argument("beacon CSV: expected header 'index,x,y'");
  }
  BeaconSet out;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::istringstream ls(line);
    std::string idx, xs, ys;
    if (!std::getline(ls, idx, ',') || !std::getline(ls, xs, ',') || !std::getline(ls, ys)) {
      throw std::invalid_argument("beacon CSV line " + std::to_string(lineno) + ": expected 3 fields");
    }
    try {
      if (std::stoul(idx) != out.size()) {
        throw std::invalid_argument("beacon CSV line " + std::to_string(lineno) + ": indices must be 0,1,2,...");
      }
      out.positions.push_back({std::stod(xs), std::stod(ys)});
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception&) {
      throw std::invalid_argument("beacon CSV line " + std::to_string(lineno) + ": not a number");
    }
  }
  return out;
}

std::string summaries_csv(std::span<const SummaryVector> batch) {
  std::ostringstream os;
  for (std::size_t i = 0; i < kSummaryLength; ++i) os << (i ? "," : "") << kSummaryLabels[i];
  os << '\n';
  for (const auto& s : batch) {
    for (std::size_t i = 0; i < kSummaryLength; ++i) os << (i ? "," : "") << format_double(s[i]);
    os << '\n';
  }
  return os.str();
}

std::string posterior_csv(const PosteriorSamples& posterior) {
  std::ostringstream os;
  os << "w,r,v,eta,weight\n";
  for (std::size_t i = 0; i < posterior.size(); ++i) {
    const auto& d = posterior.draws[i];
    os << format_double(d.w) << ',' << format_double(d.r) << ',' << format_double(d.v) << ','
       << format_double(d.eta) << ',' << format_double(posterior.weights[i]) << '\n';
  }
  return os.str();
}

std::string coverage_csv(const RecoveryReport& report) {
  std::ostringstream os;
  os << "param,alpha,coverage,lower95,upper95\n";
  for (const auto& p : report.params) {
    for (std::size_t k = 0; k < p.curve.alphas.size(); ++k) {
      os << p.name << ',' << format_double(p.curve.alphas[k]) << ',' << format_double(p.curve.coverage[k]) << ','
         << format_double(p.curve.band[k].lower) << ',' << format_double(p.curve.band[k].upper) << '\n';
    }
  }
  return os.str();
}

std::string recovery_csv(const RecoveryReport& report) {
  std::ostringstream os;
  os << "case,param,truth,median\n";
  for (const auto& p : report.params) {
    for (std::size_t s = 0; s < p.truths.size(); ++s) {
      os << s << ',' << p.name << ',' << format_double(p.truths[s]) << ',' << format_double(p.medians[s]) << '\n';
    }
  }
  return os.str();
}

}  // namespace roomswarm::io
