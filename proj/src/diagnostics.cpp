#include "roomswarm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/beta.hpp>

namespace roomswarm {

double empirical_coverage(std::span<const double> truths, std::span<const PosteriorSamples> posteriors,
                          Param which, double alpha) {
  if (truths.empty() || truths.size() != posteriors.size()) {
    throw std::invalid_argument("coverage needs matching, non-empty truths and posteriors");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  const double beta = 0.5 * (1.0 - alpha);
  std::size_t inside = 0;
  for (std::size_t s = 0; s < truths.size(); ++s) {
    const double lo = posterior_quantile(posteriors[s], which, beta);
    const double hi = posterior_quantile(posteriors[s], which, 1.0 - beta);
    if (truths[s] >= lo && truths[s] <= hi) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(truths.size());
}

double ece_from_curve(std::span<const double> coverage, std::span<const double> alphas) {
  if (alphas.empty() || coverage.size() != alphas.size()) {
    throw std::invalid_argument("ECE needs a non-empty coverage curve matching the alpha grid");
  }
  double s = 0.0;
  for (std::size_t k = 0; k < alphas.size(); ++k) s += std::abs(coverage[k] - alphas[k]);
  return s / static_cast<double>(alphas.size());
}

double ece(std::span<const double> truths, std::span<const PosteriorSamples> posteriors, Param which,
           std::span<const double> alphas) {
  std::vector<double> c(alphas.size());
  for (std::size_t k = 0; k < alphas.size(); ++k) c[k] = empirical_coverage(truths, posteriors, which, alphas[k]);
  return ece_from_curve(c, alphas);
}

std::vector<double> alpha_grid(std::size_t k, double lo, double hi) {
  if (k == 0) throw std::invalid_argument("alpha grid needs at least one level");
  if (k == 1) return {lo};
  std::vector<double> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(k - 1);
  return out;
}

Contraction posterior_contraction(const PosteriorSamples& posterior, double prior_variance, Param which) {
  if (!(prior_variance > 0.0)) throw std::invalid_argument("prior variance must be > 0");
  if (posterior.size() < 2) return {1.0, true};
  return {1.0 - posterior.variance(which) / prior_variance, false};
}

double nrmse(std::span<const double> truths, std::span<const PosteriorSamples> posteriors, Param which,
             double range_min, double range_max) {
  if (!(range_max > range_min)) throw std::invalid_argument("NRMSE range must satisfy max > min");
  if (truths.empty() || truths.size() != posteriors.size()) {
    throw std::invalid_argument("NRMSE needs matching, non-empty truths and posteriors");
  }
  double total = 0.0;
  for (std::size_t s = 0; s < truths.size(); ++s) {
    const PosteriorSamples& p = posteriors[s];
    double weight_sum = 0.0;
    double sq = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double e = get(p.draws[j], which) - truths[s];
      sq += p.weights[j] * e * e;
      weight_sum += p.weights[j];
    }
    total += sq / weight_sum;
  }
  return std::sqrt(total / static_cast<double>(truths.size())) / (range_max - range_min);
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("correlation needs two equal-length samples of size >= 2");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw std::invalid_argument("correlation undefined for a constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

Interval clopper_pearson(std::size_t k, std::size_t n, double confidence) {
  if (n == 0 || k > n) throw std::invalid_argument("Clopper-Pearson needs 0 <= k <= n, n > 0");
  const double tail = 0.5 * (1.0 - confidence);
  Interval out;
  const auto kd = static_cast<double>(k);
  const auto nd = static_cast<double>(n);
  out.lower = k == 0 ? 0.0 : boost::math::quantile(boost::math::beta_distribution<>(kd, nd - kd + 1.0), tail);
  out.upper = k == n ? 1.0 : boost::math::quantile(boost::math::beta_distribution<>(kd + 1.0, nd - kd), 1.0 - tail);
  return out;
}

RecoveryReport make_report(const PriorSpec& prior, std::span<const GlobalParams> truths,
                           std::span<const PosteriorSamples> posteriors, std::span<const double> alphas,
                           std::string estimator) {
  const std::size_t S = truths.size();
  if (S < 2 || posteriors.size() != S) throw std::invalid_argument("a recovery report needs S >= 2 cases");

  RecoveryReport report;
  report.cases = S;
  report.grid_size = alphas.size();
  report.estimator = std::move(estimator);

  for (std::size_t p = 0; p < kNumParams; ++p) {
    const auto which = static_cast<Param>(p);
    ParameterReport& pr = report.params[p];
    pr.name = std::string(kParamNames[p]);
    pr.truths.resize(S);
    pr.medians.resize(S);
    for (std::size_t s = 0; s < S; ++s) {
      pr.truths[s] = get(truths[s], which);
      pr.medians[s] = posterior_quantile(posteriors[s], which, 0.5);
    }

    pr.curve.alphas.assign(alphas.begin(), alphas.end());
    for (double a : alphas) {
      const double c = empirical_coverage(pr.truths, posteriors, which, a);
      pr.curve.coverage.push_back(c);
      pr.curve.band.push_back(clopper_pearson(static_cast<std::size_t>(std::lround(c * S)), S, 0.95));
    }
    pr.ece = ece_from_curve(pr.curve.coverage, alphas);

    const double var_prior = prior_variance(prior, which);
    double pc = 0.0;
    for (const auto& post : posteriors) {
      const Contraction c = posterior_contraction(post, var_prior, which);
      pc += c.value;
      if (c.degenerate) ++pr.degenerate_posteriors;
    }
    pr.contraction = pc / static_cast<double>(S);

    // Bounded parameters use their prior support; r has none, so use the observed truth range.
    if (which == Param::r) {
      const auto [lo, hi] = std::minmax_element(pr.truths.begin(), pr.truths.end());
      pr.range_min = *lo;
      pr.range_max = *hi;
    } else {
      pr.range_min = 0.0;
      pr.range_max = 1.0;
    }
    pr.nrmse = nrmse(pr.truths, posteriors, which, pr.range_min, pr.range_max);

    try {
      pr.correlation = recovery_correlation(pr.truths, pr.medians);
    } catch (const std::invalid_argument&) {
      pr.correlation = 0.0;
      pr.correlation_defined = false;
    }
  }
  return report;
}

std::string to_string(Estimator e) {
  switch (e) {
    case Estimator::rejection: return "rejection";
    case Estimator::smc: return "smc";
    case Estimator::prior: return "prior";
  }
  return "unknown";
}

Estimator estimator_from_string(const std::string& s) {
  if (s == "rejection") return Estimator::rejection;
  if (s == "smc") return Estimator::smc;
  if (s == "prior") return Estimator::prior;
  throw std::invalid_argument("unknown estimator '" + s + "' (expected rejection, smc or prior)");
}

std::uint64_t study_case_seed(std::uint64_t base_seed, std::size_t index) {
  return derive_seed(base_seed, SeedStream::study_case, index);
}

StudyResult run_recovery_study(const ReferenceTable& table, const BatchContext& ctx,
                               const StudySettings& settings, const ProgressFn& progress) {
  const std::size_t S = settings.cases;
  if (S < 2) throw std::invalid_argument("recovery study needs S >= 2");

  StudyResult out;
  out.truths.resize(S);
  std::vector<SimulationJob> jobs(S);
  for (std::size_t s = 0; s < S; ++s) {
    const std::uint64_t seed = study_case_seed(settings.base_seed, s);
    Rng rng(seed);
    out.truths[s] = sample_prior(table.prior, rng);
    jobs[s] = {out.truths[s], seed};
  }
  const std::vector<SummaryVector> observed = summarize_batch_parallel(ctx, jobs, settings.workers);

  out.posteriors.resize(S);
  for (std::size_t s = 0; s < S; ++s) {
    try {
      switch (settings.estimator) {
        case Estimator::prior: {
          Rng rng(derive_seed(jobs[s].seed, SeedStream::null_posterior, 0));
          std::vector<GlobalParams> draws(settings.prior_draws);
          for (auto& d : draws) d = sample_prior(table.prior, rng);
          out.posteriors[s].weights.assign(draws.size(), 1.0 / static_cast<double>(draws.size()));
          out.posteriors[s].draws = std::move(draws);
          break;
        }
        case Estimator::rejection:
          out.posteriors[s] = abc_rejection(observed[s], table, settings.accept_fraction);
          break;
        case Estimator::smc:
          out.posteriors[s] =
              abc_smc_from_table(observed[s], table, ctx, settings.smc, jobs[s].seed, settings.workers).posterior;
          break;
      }
    } catch (const DegenerateGeneration& e) {
      throw StudyCaseError(s, e.what(), true);
    } catch (const std::exception& e) {
      throw StudyCaseError(s, e.what(), false);
    }
    if (progress) progress(s + 1, S);
  }

  out.report = make_report(table.prior, out.truths, out.posteriors, settings.alphas, to_string(settings.estimator));
  return out;
}

}  // namespace roomswarm
