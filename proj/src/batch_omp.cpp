#include <omp.h>

#include <cstdlib>
#include <limits>
#include <string>

#include "roomswarm/batch.hpp"

namespace roomswarm {

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ROOMSWARM_WORKERS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return omp_get_max_threads();
}

std::vector<SummaryVector> summarize_batch_parallel(const BatchContext& ctx,
                                                    std::span<const SimulationJob> jobs,
                                                    int workers, const ProgressFn& progress) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(jobs.size());
  std::vector<SummaryVector> out(jobs.size());

  // Lowest failing index wins so the reported error does not depend on scheduling.
  std::size_t first_error = std::numeric_limits<std::size_t>::max();
  std::string error_text;
  std::size_t done = 0;

#pragma omp parallel for schedule(dynamic, 4) num_threads(resolve_workers(workers))
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      out[idx] = simulate_summary(ctx, jobs[idx]);
    } catch (const std::exception& e) {
#pragma omp critical(roomswarm_batch_error)
      if (idx < first_error) {
        first_error = idx;
        error_text = e.what();
      }
    }
    if (progress) {
#pragma omp critical(roomswarm_batch_progress)
      progress(++done, jobs.size());
    }
  }

  if (first_error != std::numeric_limits<std::size_t>::max()) throw BatchError(first_error, error_text);
  return out;
}

}  // namespace roomswarm
