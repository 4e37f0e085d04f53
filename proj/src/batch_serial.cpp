#include "roomswarm/batch.hpp"

namespace roomswarm {

SummaryVector simulate_summary(const BatchContext& ctx, const SimulationJob& job) {
  SimConfig cfg = ctx.config;
  cfg.seed = job.seed;
  return summarize(augment(simulate(job.params, ctx.fixed, ctx.env, cfg)));
}

std::vector<SummaryVector> summarize_batch_serial(const BatchContext& ctx,
                                                  std::span<const SimulationJob> jobs,
                                                  const ProgressFn& progress) {
  std::vector<SummaryVector> out(jobs.size());
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    try {
      out[i] = simulate_summary(ctx, jobs[i]);
    } catch (const std::exception& e) {
      throw BatchError(i, e.what());
    }
    if (progress) progress(i + 1, jobs.size());
  }
  return out;
}

}  // namespace roomswarm
