#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "roomswarm/inference.hpp"

namespace roomswarm {

/// Fraction of cases whose truth lies in the closed central credible interval
/// [q_beta, q_{1-beta}], beta = (1 - alpha) / 2.
double empirical_coverage(std::span<const double> truths, std::span<const PosteriorSamples> posteriors,
                          Param which, double alpha);

/// Mean absolute gap between a coverage curve and its nominal levels.
double ece_from_curve(std::span<const double> coverage, std::span<const double> alphas);

double ece(std::span<const double> truths, std::span<const PosteriorSamples> posteriors, Param which,
           std::span<const double> alphas);

/// K equally spaced credibility levels in [lo, hi]. The default grid is 20 levels in [0.05, 0.995].
std::vector<double> alpha_grid(std::size_t k = 20, double lo = 0.05, double hi = 0.995);

struct Contraction {
  double value = 0.0;
  bool degenerate = false;  ///< posterior had fewer than two draws (value forced to 1)
};

/// 1 - Var_post / Var_prior with the weighted posterior variance.
Contraction posterior_contraction(const PosteriorSamples& posterior, double prior_variance, Param which);

/// Range-normalized RMSE of posterior draws around their truths (weighted over draws).
double nrmse(std::span<const double> truths, std::span<const PosteriorSamples> posteriors, Param which,
             double range_min, double range_max);

/// Pearson correlation. Throws std::invalid_argument for fewer than two
/// points or a constant input.
double pearson(std::span<const double> x, std::span<const double> y);

inline double recovery_correlation(std::span<const double> truths, std::span<const double> medians) {
  return pearson(truths, medians);
}

struct Interval {
  double lower = 0.0;
  double upper = 1.0;
};

/// Exact binomial (Clopper-Pearson) interval for k successes in n trials at
/// the given confidence level.
Interval clopper_pearson(std::size_t k, std::size_t n, double confidence);

struct CoverageCurve {
  std::vector<double> alphas;
  std::vector<double> coverage;
  std::vector<Interval> band;  ///< 95% Clopper-Pearson band of each coverage value
};

struct ParameterReport {
  std::string name;
  double ece = 0.0;
  double nrmse = 0.0;
  double contraction = 0.0;
  double correlation = 0.0;
  bool correlation_defined = true;
  std::size_t degenerate_posteriors = 0;
  double range_min = 0.0;
  double range_max = 1.0;
  CoverageCurve curve;
  std::vector<double> truths;
  std::vector<double> medians;
};

struct RecoveryReport {
  std::size_t cases = 0;       ///< S
  std::size_t grid_size = 0;   ///< K
  std::string estimator;
  std::array<ParameterReport, kNumParams> params;
};

/// Per-parameter metrics for a finished ensemble of (truth, posterior) pairs.
RecoveryReport make_report(const PriorSpec& prior, std::span<const GlobalParams> truths,
                           std::span<const PosteriorSamples> posteriors, std::span<const double> alphas,
                           std::string estimator);

enum class Estimator { rejection, smc, prior };

std::string to_string(Estimator e);
Estimator estimator_from_string(const std::string& s);

struct StudySettings {
  Estimator estimator = Estimator::smc;
  std::size_t cases = 300;         ///< S
  double accept_fraction = 0.01;   ///< rejection estimator
  SmcSchedule smc;                 ///< SMC estimator (generation 0 uses the table)
  std::size_t prior_draws = 1000;  ///< null estimator: posterior := this many prior draws
  std::vector<double> alphas = alpha_grid();
  std::uint64_t base_seed = 1;
  int workers = 0;
};

/// Seed of test case `index`; disjoint stream from the table rows.
std::uint64_t study_case_seed(std::uint64_t base_seed, std::size_t index);

struct StudyResult {
  RecoveryReport report;
  std::vector<GlobalParams> truths;
  std::vector<PosteriorSamples> posteriors;
};

/// Draws S (truth, observation) pairs, runs the estimator per observation and
/// scores the ensemble. Inference failures are rethrown with the case index.
StudyResult run_recovery_study(const ReferenceTable& table, const BatchContext& ctx,
                               const StudySettings& settings, const ProgressFn& progress = {});

/// Case-indexed wrapper for estimator failures.
class StudyCaseError : public std::runtime_error {
 public:
  StudyCaseError(std::size_t index, const std::string& what, bool degenerate)
      : std::runtime_error("test case " + std::to_string(index) + ": " + what),
        index_(index),
        degenerate_(degenerate) {}
  std::size_t index() const { return index_; }
  bool degenerate() const { return degenerate_; }

 private:
  std::size_t index_;
  bool degenerate_;
};

}  // namespace roomswarm
