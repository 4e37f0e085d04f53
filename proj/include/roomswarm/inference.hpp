#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "roomswarm/batch.hpp"
#include "roomswarm/params.hpp"
#include "roomswarm/summaries.hpp"

namespace roomswarm {

/// Prior-predictive (parameters, summary) pairs sharing one prior, config and layout.
struct ReferenceTable {
  PriorSpec prior;
  SimConfig config;
  RoomConfig room;
  FixedParams fixed;
  BeaconSet beacons;
  std::uint64_t base_seed = 0;

  std::vector<GlobalParams> params;
  std::vector<SummaryVector> summaries;
  std::vector<std::uint64_t> seeds;

  std::size_t size() const { return params.size(); }
};

/// Seed of row `index`: drives both the prior draw and the rollout.
std::uint64_t table_row_seed(std::uint64_t base_seed, std::size_t index);

ReferenceTable build_reference_table(const PriorSpec& prior, const BatchContext& ctx, std::size_t rows,
                                     std::uint64_t base_seed, int workers = 0,
                                     const ProgressFn& progress = {});

/// Weighted draws; weights sum to one.
struct PosteriorSamples {
  std::vector<GlobalParams> draws;
  std::vector<double> weights;

  std::size_t size() const { return draws.size(); }
  std::vector<double> values(Param which) const;
  double mean(Param which) const;
  double variance(Param which) const;
  double effective_sample_size() const;
};

/// Euclidean distance. Throws std::invalid_argument on a length mismatch.
double distance(std::span<const double> a, std::span<const double> b);
inline double distance(const SummaryVector& a, const SummaryVector& b) {
  return distance(std::span<const double>(a), std::span<const double>(b));
}

struct RejectionResult {
  PosteriorSamples posterior;
  std::vector<std::size_t> rows;    ///< accepted table rows, closest first
  std::vector<double> distances;    ///< standardized distance of each accepted row
  Standardizer transform;
};

/// Keeps the `keep` rows closest to the observation (ties broken by row index).
RejectionResult abc_rejection_keep(const SummaryVector& observed, const ReferenceTable& table,
                                   std::size_t keep);

/// Keeps ceil(accept_fraction * N) rows with uniform weights.
PosteriorSamples abc_rejection(const SummaryVector& observed, const ReferenceTable& table,
                               double accept_fraction);

struct SmcSchedule {
  std::size_t population = 500;  ///< M
  std::size_t generations = 4;   ///< G
  double quantile = 0.5;         ///< q
  std::size_t max_proposal_retries = 1000;
  std::size_t max_simulations_per_generation = 0;  ///< 0 means 200 * M
};

/// Signals a generation that accepted nothing or produced unusable weights.
class DegenerateGeneration : public std::runtime_error {
 public:
  DegenerateGeneration(std::size_t generation, const std::string& what)
      : std::runtime_error("degenerate generation " + std::to_string(generation) + ": " + what),
        generation_(generation) {}
  std::size_t generation() const { return generation_; }

 private:
  std::size_t generation_;
};

struct SmcResult {
  PosteriorSamples posterior;
  std::vector<double> tolerances;        ///< per generation; generation 0 is the largest accepted distance
  std::vector<std::size_t> simulations;  ///< rollouts spent per generation
};

/// Table rows used by generation 0 of abc_smc: ceil(M / q).
std::size_t smc_initial_rows(const SmcSchedule& schedule);
/// Base seed of the fresh generation-0 table built by abc_smc.
std::uint64_t smc_initial_table_seed(std::uint64_t base_seed);

/// ABC-SMC whose generation 0 is rejection on a fresh ceil(M/q)-row table.
SmcResult abc_smc(const SummaryVector& observed, const PriorSpec& prior, const BatchContext& ctx,
                  const SmcSchedule& schedule, std::uint64_t base_seed, int workers = 0);

/// ABC-SMC whose generation 0 is rejection (keep M) on an existing table.
/// Distances use the table's median/MAD transform throughout.
SmcResult abc_smc_from_table(const SummaryVector& observed, const ReferenceTable& table,
                             const BatchContext& ctx, const SmcSchedule& schedule,
                             std::uint64_t base_seed, int workers = 0);

/// Weighted inverse-CDF quantile: smallest draw whose cumulative weight reaches beta.
double posterior_quantile(const PosteriorSamples& samples, Param which, double beta);

}  // namespace roomswarm
