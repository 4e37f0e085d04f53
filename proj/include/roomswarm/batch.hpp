#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "roomswarm/dynamics.hpp"
#include "roomswarm/summaries.hpp"

namespace roomswarm {

/// Shared, read-only inputs of a batch of rollouts.
struct BatchContext {
  FixedParams fixed;
  Environment env;
  SimConfig config;  ///< config.seed is ignored; each job carries its own seed
};

struct SimulationJob {
  GlobalParams params;
  std::uint64_t seed = 0;
};

/// A rollout failed; carries the job index.
class BatchError : public std::runtime_error {
 public:
  BatchError(std::size_t index, const std::string& what)
      : std::runtime_error("row " + std::to_string(index) + ": " + what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// simulate -> augment -> summarize for one job.
SummaryVector simulate_summary(const BatchContext& ctx, const SimulationJob& job);

/// Reference implementation: jobs in index order on the calling thread.
std::vector<SummaryVector> summarize_batch_serial(const BatchContext& ctx,
                                                  std::span<const SimulationJob> jobs,
                                                  const ProgressFn& progress = {});

/// OpenMP implementation. Output is bitwise identical to the serial kernel
/// for any worker count: jobs share nothing mutable and results land in
/// their own slots.
std::vector<SummaryVector> summarize_batch_parallel(const BatchContext& ctx,
                                                    std::span<const SimulationJob> jobs,
                                                    int workers, const ProgressFn& progress = {});

/// Explicit request if > 0, else $ROOMSWARM_WORKERS, else the OpenMP default.
int resolve_workers(int requested);

}  // namespace roomswarm
