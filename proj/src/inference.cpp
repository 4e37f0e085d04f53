#include "roomswarm/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace roomswarm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

PosteriorSamples uniform_posterior(std::vector<GlobalParams> draws) {
  PosteriorSamples out;
  const double w = 1.0 / static_cast<double>(draws.size());
  out.weights.assign(draws.size(), w);
  out.draws = std::move(draws);
  return out;
}

/// Index of the first element whose cumulative weight exceeds u in [0, 1).
std::size_t pick_weighted(const std::vector<double>& cumulative, double u) {
  const double target = u * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
  if (it == cumulative.end()) --it;
  return static_cast<std::size_t>(it - cumulative.begin());
}

}  // namespace

std::uint64_t table_row_seed(std::uint64_t base_seed, std::size_t index) {
  return derive_seed(base_seed, SeedStream::table_row, index);
}

ReferenceTable build_reference_table(const PriorSpec& prior, const BatchContext& ctx, std::size_t rows,
                                     std::uint64_t base_seed, int workers, const ProgressFn& progress) {
  if (rows < 1) throw std::invalid_argument("reference table needs at least one row");
  ReferenceTable table;
  table.prior = prior;
  table.config = ctx.config;
  table.config.seed = base_seed;
  table.room = ctx.env.room;
  table.fixed = ctx.fixed;
  table.beacons = ctx.env.beacons;
  table.base_seed = base_seed;

  std::vector<SimulationJob> jobs(rows);
  table.params.resize(rows);
  table.seeds.resize(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const std::uint64_t seed = table_row_seed(base_seed, i);
    Rng rng(seed);
    table.seeds[i] = seed;
    table.params[i] = sample_prior(prior, rng);
    jobs[i] = {table.params[i], seed};
  }
  table.summaries = summarize_batch_parallel(ctx, jobs, workers, progress);
  return table;
}

std::vector<double> PosteriorSamples::values(Param which) const {
  std::vector<double> out(draws.size());
  for (std::size_t i = 0; i < draws.size(); ++i) out[i] = get(draws[i], which);
  return out;
}

double PosteriorSamples::mean(Param which) const {
  double m = 0.0;
  for (std::size_t i = 0; i < draws.size(); ++i) m += weights[i] * get(draws[i], which);
  return m;
}

double PosteriorSamples::variance(Param which) const {
  const double m = mean(which);
  double v = 0.0;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const double d = get(draws[i], which) - m;
    v += weights[i] * d * d;
  }
  return v;
}

double PosteriorSamples::effective_sample_size() const {
  double s = 0.0;
  for (double w : weights) s += w * w;
  return s > 0.0 ? 1.0 / s : 0.0;
}

double distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("summary length mismatch: " + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

RejectionResult abc_rejection_keep(const SummaryVector& observed, const ReferenceTable& table,
                                   std::size_t keep) {
  const std::size_t n = table.size();
  if (n == 0) throw std::invalid_argument("reference table is empty");
  keep = std::clamp<std::size_t>(keep, 1, n);

  RejectionResult out;
  // A single-row table cannot be standardized; fall back to the identity.
  if (n >= 2) {
    out.transform = fit_standardizer(table.summaries);
  } else {
    out.transform.location.fill(0.0);
    out.transform.scale.fill(1.0);
  }
  const SummaryVector obs = out.transform.apply(observed);

  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = distance(obs, out.transform.apply(table.summaries[i]));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
  order.resize(keep);

  std::vector<GlobalParams> draws;
  draws.reserve(keep);
  for (std::size_t i : order) {
    draws.push_back(table.params[i]);
    out.distances.push_back(d[i]);
  }
  out.rows = std::move(order);
  out.posterior = uniform_posterior(std::move(draws));
  return out;
}

PosteriorSamples abc_rejection(const SummaryVector& observed, const ReferenceTable& table,
                               double accept_fraction) {
  if (!(accept_fraction > 0.0 && accept_fraction <= 1.0)) {
    throw std::invalid_argument("accept_fraction must lie in (0, 1]");
  }
  const double n = static_cast<double>(table.size());
  // Absorb rounding so that fraction k/N keeps exactly k rows.
  const auto keep = static_cast<std::size_t>(std::ceil(accept_fraction * n - 1e-9));
  return abc_rejection_keep(observed, table, keep).posterior;
}

std::size_t smc_initial_rows(const SmcSchedule& schedule) {
  return static_cast<std::size_t>(
      std::ceil(static_cast<double>(schedule.population) / schedule.quantile - 1e-9));
}

std::uint64_t smc_initial_table_seed(std::uint64_t base_seed) {
  return derive_seed(base_seed, SeedStream::smc_generation, 0);
}

SmcResult abc_smc(const SummaryVector& observed, const PriorSpec& prior, const BatchContext& ctx,
                  const SmcSchedule& schedule, std::uint64_t base_seed, int workers) {
  if (schedule.population < 2) throw std::invalid_argument("SMC population must be >= 2");
  if (!(schedule.quantile > 0.0 && schedule.quantile < 1.0)) {
    throw std::invalid_argument("SMC quantile must lie in (0, 1)");
  }
  const ReferenceTable table = build_reference_table(prior, ctx, smc_initial_rows(schedule),
                                                     smc_initial_table_seed(base_seed), workers);
  return abc_smc_from_table(observed, table, ctx, schedule, base_seed, workers);
}

SmcResult abc_smc_from_table(const SummaryVector& observed, const ReferenceTable& table,
                             const BatchContext& ctx, const SmcSchedule& schedule,
                             std::uint64_t base_seed, int workers) {
  const std::size_t M = schedule.population;
  if (M < 2) throw std::invalid_argument("SMC population must be >= 2");
  if (schedule.generations < 1) throw std::invalid_argument("SMC needs at least one generation");
  if (!(schedule.quantile > 0.0 && schedule.quantile < 1.0)) {
    throw std::invalid_argument("SMC quantile must lie in (0, 1)");
  }
  const PriorSpec& prior = table.prior;
  const std::size_t max_sims =
      schedule.max_simulations_per_generation ? schedule.max_simulations_per_generation : 200 * M;

  SmcResult result;
  RejectionResult gen0 = abc_rejection_keep(observed, table, M);
  const Standardizer transform = gen0.transform;
  const SummaryVector obs = transform.apply(observed);

  PosteriorSamples population = std::move(gen0.posterior);
  std::vector<double> accepted_dist = std::move(gen0.distances);
  result.tolerances.push_back(accepted_dist.empty() ? 0.0 : accepted_dist.back());
  result.simulations.push_back(table.size());

  for (std::size_t g = 1; g < schedule.generations; ++g) {
    const std::size_t m_prev = population.size();

    std::vector<double> sorted = accepted_dist;
    std::sort(sorted.begin(), sorted.end());
    const auto qi = static_cast<std::size_t>(std::ceil(schedule.quantile * m_prev - 1e-9));
    const double tolerance = sorted[std::clamp<std::size_t>(qi, 1, m_prev) - 1];

    std::array<double, kNumParams> tau{};
    for (std::size_t p = 0; p < kNumParams; ++p) {
      tau[p] = std::sqrt(2.0 * population.variance(static_cast<Param>(p)));
      if (!(tau[p] > 0.0) || !std::isfinite(tau[p])) {
        throw DegenerateGeneration(g, "population collapsed on parameter " + std::string(kParamNames[p]));
      }
    }

    std::vector<double> cumulative(m_prev);
    std::partial_sum(population.weights.begin(), population.weights.end(), cumulative.begin());

    const std::uint64_t gen_seed = derive_seed(base_seed, SeedStream::smc_generation, g);
    Rng rng(gen_seed);

    std::vector<GlobalParams> accepted;
    std::vector<double> distances;
    std::size_t proposed = 0;
    while (accepted.size() < M) {
      if (proposed >= max_sims) {
        throw DegenerateGeneration(g, "accepted " + std::to_string(accepted.size()) + " of " +
                                          std::to_string(M) + " particles within " +
                                          std::to_string(max_sims) + " simulations");
      }
      // Proposals are generated sequentially, then simulated as one batch, so
      // results do not depend on the worker count.
      const std::size_t batch = std::min(M, max_sims - proposed);
      std::vector<SimulationJob> jobs(batch);
      for (std::size_t k = 0; k < batch; ++k) {
        std::size_t tries = 0;
        GlobalParams cand;
        for (;;) {
          if (++tries > schedule.max_proposal_retries) {
            throw DegenerateGeneration(g, "perturbation kernel keeps leaving the prior support");
          }
          const GlobalParams& parent = population.draws[pick_weighted(cumulative, uniform01(rng))];
          auto a = to_array(parent);
          for (std::size_t p = 0; p < kNumParams; ++p) a[p] += tau[p] * standard_normal(rng);
          cand = from_array(a);
          if (std::isfinite(prior_log_density(prior, cand))) break;
        }
        jobs[k] = {cand, derive_seed(gen_seed, SeedStream::smc_proposal, proposed + k)};
      }
      const auto summaries = summarize_batch_parallel(ctx, jobs, workers);
      proposed += batch;
      for (std::size_t k = 0; k < batch && accepted.size() < M; ++k) {
        const double d = distance(obs, transform.apply(summaries[k]));
        if (d <= tolerance) {
          accepted.push_back(jobs[k].params);
          distances.push_back(d);
        }
      }
    }

    // Importance weights: prior / mixture of perturbation kernels.
    std::vector<double> log_w(M);
    double log_norm_const = 0.0;
    for (std::size_t p = 0; p < kNumParams; ++p) log_norm_const += -0.5 * kLog2Pi - std::log(tau[p]);
    std::vector<double> terms(m_prev);
    for (std::size_t i = 0; i < M; ++i) {
      const auto x = to_array(accepted[i]);
      double max_term = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < m_prev; ++j) {
        const auto y = to_array(population.draws[j]);
        double q = 0.0;
        for (std::size_t p = 0; p < kNumParams; ++p) {
          const double z = (x[p] - y[p]) / tau[p];
          q -= 0.5 * z * z;
        }
        terms[j] = std::log(population.weights[j]) + q;
        max_term = std::max(max_term, terms[j]);
      }
      double s = 0.0;
      for (std::size_t j = 0; j < m_prev; ++j) s += std::exp(terms[j] - max_term);
      log_w[i] = prior_log_density(prior, accepted[i]) - (max_term + std::log(s) + log_norm_const);
    }
    const double max_lw = *std::max_element(log_w.begin(), log_w.end());
    if (!std::isfinite(max_lw)) throw DegenerateGeneration(g, "non-finite importance weights");
    std::vector<double> weights(M);
    double total = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
      weights[i] = std::exp(log_w[i] - max_lw);
      total += weights[i];
    }
    for (double& w : weights) w /= total;
    for (double w : weights) {
      if (!std::isfinite(w)) throw DegenerateGeneration(g, "non-finite importance weights");
    }

    population.draws = std::move(accepted);
    population.weights = std::move(weights);
    accepted_dist = std::move(distances);
    result.tolerances.push_back(tolerance);
    result.simulations.push_back(proposed);
  }

  result.posterior = std::move(population);
  return result;
}

double posterior_quantile(const PosteriorSamples& samples, Param which, double beta) {
  const std::size_t n = samples.size();
  if (n == 0) throw std::invalid_argument("quantile of an empty posterior");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const auto vals = samples.values(which);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
  double total = 0.0;
  for (double w : samples.weights) total += w;
  const double target = beta * total;
  const double slack = 1e-12 * total;
  double cum = 0.0;
  for (std::size_t i : order) {
    cum += samples.weights[i];
    if (cum >= target - slack) return vals[i];
  }
  return vals[order.back()];
}

}  // namespace roomswarm
