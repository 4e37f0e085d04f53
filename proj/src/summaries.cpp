#include "roomswarm/summaries.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace roomswarm {

namespace {

struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t n = 0;

  void add(double x) {
    sum += x;
    sum_sq += x * x;
    ++n;
  }
  double mean() const { return n ? sum / n : 0.0; }
  double variance() const {
    if (n == 0) return 0.0;
    const double m = mean();
    return std::max(0.0, sum_sq / n - m * m);
  }
};

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + n / 2, v.end());
  const double hi = v[n / 2];
  if (n % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + n / 2);
  return 0.5 * (lo + hi);
}

}  // namespace

double polarization(std::span<const double> headings) {
  if (headings.empty()) throw std::invalid_argument("polarization of an empty heading list");
  double c = 0.0;
  double s = 0.0;
  for (double h : headings) {
    c += std::cos(h);
    s += std::sin(h);
  }
  const double n = static_cast<double>(headings.size());
  c /= n;
  s /= n;
  return std::min(1.0, std::sqrt(c * c + s * s));
}

std::vector<double> polarization_series(const TrajectorySet& traj) {
  const std::size_t A = traj.agents();
  const std::size_t T = traj.steps();
  std::vector<double> out(T);
  std::vector<double> column(A);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t a = 0; a < A; ++a) column[a] = traj.theta[traj.at(a, t)];
    out[t] = polarization(column);
  }
  return out;
}

double autocorrelation(std::span<const double> series, std::size_t lag) {
  const std::size_t n = series.size();
  if (lag >= n) return 0.0;
  const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  // Rounding in the mean leaves residuals on a flat series; treat it as flat.
  if (*hi - *lo <= 1e-12 * std::max(1.0, std::abs(*hi))) return 0.0;
  double mean = 0.0;
  for (double x : series) mean += x;
  mean /= static_cast<double>(n);
  double denom = 0.0;
  for (double x : series) denom += (x - mean) * (x - mean);
  double num = 0.0;
  for (std::size_t t = 0; t + lag < n; ++t) num += (series[t] - mean) * (series[t + lag] - mean);
  return num / denom;
}

SummaryVector summarize(const AugmentedSet& aug) {
  const TrajectorySet& traj = aug.traj;
  const std::size_t A = traj.agents();
  const std::size_t T = traj.steps();
  const double dt = traj.config.dt;

  const std::vector<double> pol = polarization_series(traj);
  Moments pol_m;
  for (double p : pol) pol_m.add(p);

  Moments speed_m;  // one entry per step transition
  for (std::size_t t = 0; t + 1 < T; ++t) {
    double s = 0.0;
    for (std::size_t a = 0; a < A; ++a) s += distance(traj.position(a, t), traj.position(a, t + 1)) / dt;
    speed_m.add(s / static_cast<double>(A));
  }

  Moments n_m;
  Moments d_m;
  for (std::size_t k = 0; k < A * T; ++k) {
    n_m.add(traj.ncount[k]);
    if (traj.ncount[k] > 0) d_m.add(traj.dist[k]);
  }

  Moments av_m;
  double av_abs = 0.0;
  double nd_abs = 0.0;
  for (std::size_t k = 0; k < aug.angular_velocity.size(); ++k) {
    av_m.add(aug.angular_velocity[k]);
    av_abs += std::abs(aug.angular_velocity[k]);
    nd_abs += std::abs(aug.neighbor_delta[k]);
  }
  const double n_aug = static_cast<double>(aug.angular_velocity.size());

  const auto detected = detect_beacons(traj.beacons, traj.room);
  std::vector<std::optional<std::size_t>> assigned(A);
  for (std::size_t a = 0; a < A; ++a) assigned[a] = nearest_beacon(traj.position(a, 0), traj.beacons, detected);
  Moments beacon_m;
  std::size_t boundary_steps = 0;
  for (std::size_t t = 0; t < T; ++t) {
    double sum = 0.0;
    std::size_t with_beacon = 0;
    bool any_on_boundary = false;
    for (std::size_t a = 0; a < A; ++a) {
      const Vec2 p = traj.position(a, t);
      any_on_boundary = any_on_boundary || traj.room.on_boundary(p);
      const auto b = traj.config.reassign_beacons ? nearest_beacon(p, traj.beacons, detected) : assigned[a];
      if (b) {
        sum += distance(p, traj.beacons.positions[*b]);
        ++with_beacon;
      }
    }
    beacon_m.add(with_beacon ? sum / static_cast<double>(with_beacon) : 0.0);
    if (any_on_boundary) ++boundary_steps;
  }

  return SummaryVector{
      pol_m.mean(),
      pol_m.variance(),
      speed_m.mean(),
      n_m.mean(),
      n_m.variance(),
      d_m.mean(),
      d_m.variance(),
      n_aug > 0 ? av_abs / n_aug : 0.0,
      av_m.variance(),
      n_aug > 0 ? nd_abs / n_aug : 0.0,
      autocorrelation(pol, 1),
      autocorrelation(pol, 10),
      beacon_m.mean(),
      static_cast<double>(boundary_steps) / static_cast<double>(T),
  };
}

SummaryVector Standardizer::apply(const SummaryVector& s) const {
  SummaryVector out;
  for (std::size_t i = 0; i < kSummaryLength; ++i) out[i] = (s[i] - location[i]) / scale[i];
  return out;
}

Standardizer fit_standardizer(std::span<const SummaryVector> batch) {
  if (batch.size() < 2) throw std::invalid_argument("standardize needs a batch of at least 2 vectors");
  Standardizer tr;
  std::vector<double> col(batch.size());
  std::vector<double> dev(batch.size());
  for (std::size_t i = 0; i < kSummaryLength; ++i) {
    for (std::size_t k = 0; k < batch.size(); ++k) col[k] = batch[k][i];
    const double med = median_of(col);
    double mean_abs = 0.0;
    for (std::size_t k = 0; k < batch.size(); ++k) {
      dev[k] = std::abs(col[k] - med);
      mean_abs += dev[k];
    }
    mean_abs /= static_cast<double>(batch.size());
    double mad = median_of(dev);
    // Entries concentrated on a single value (e.g. boundary_fraction == 1 for
    // most rows) have MAD 0 yet still vary; fall back to the mean deviation.
    if (mad <= kScaleFloor) mad = mean_abs;
    tr.location[i] = med;
    tr.scale[i] = std::max(mad, kScaleFloor);
  }
  return tr;
}

StandardizedBatch standardize(std::span<const SummaryVector> batch) {
  StandardizedBatch out;
  out.transform = fit_standardizer(batch);
  out.values.reserve(batch.size());
  for (const auto& s : batch) out.values.push_back(out.transform.apply(s));
  return out;
}

}  // namespace roomswarm
