#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "roomswarm/observables.hpp"

namespace roomswarm {

inline constexpr std::size_t kSummaryLength = 14;

/// Statistic names, in vector order.
inline constexpr std::array<std::string_view, kSummaryLength> kSummaryLabels = {
    "polarization_mean",
    "polarization_var",
    "speed_mean",
    "ncount_mean",
    "ncount_var",
    "ndist_mean",
    "ndist_var",
    "angvel_abs_mean",
    "angvel_var",
    "ndelta_abs_mean",
    "polarization_acf1",
    "polarization_acf10",
    "beacon_dist_mean",
    "boundary_fraction",
};

using SummaryVector = std::array<double, kSummaryLength>;

/// Norm of the mean unit heading vector, in [0, 1]. Throws on empty input.
double polarization(std::span<const double> headings);

/// Polarization of every record of a trajectory.
std::vector<double> polarization_series(const TrajectorySet& traj);

/// Lag-k sample autocorrelation; 0 when the series has no variance or is too short.
double autocorrelation(std::span<const double> series, std::size_t lag);

SummaryVector summarize(const AugmentedSet& aug);

/// Median/MAD location-scale transform fitted on a batch.
struct Standardizer {
  SummaryVector location{};
  SummaryVector scale{};

  SummaryVector apply(const SummaryVector& s) const;
};

inline constexpr double kScaleFloor = 1e-12;

/// Fits the transform (throws for batches smaller than 2).
Standardizer fit_standardizer(std::span<const SummaryVector> batch);

struct StandardizedBatch {
  std::vector<SummaryVector> values;
  Standardizer transform;
};

StandardizedBatch standardize(std::span<const SummaryVector> batch);

}  // namespace roomswarm
