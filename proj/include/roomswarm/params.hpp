#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "roomswarm/random.hpp"

namespace roomswarm {

/// The four estimated parameters, shared by every agent of a simulation.
struct GlobalParams {
  double w = 0.5;    ///< modulation weight between external and internal influence, [0,1]
  double r = 1.0;    ///< neighbor sensing radius (m), > 0
  double v = 0.5;    ///< movement speed (m/s), (0,1)
  double eta = 0.2;  ///< variance of the internal rotational noise (rad^2), (0,1)

  friend bool operator==(const GlobalParams&, const GlobalParams&) = default;
};

inline constexpr std::size_t kNumParams = 4;
inline constexpr std::array<std::string_view, kNumParams> kParamNames = {"w", "r", "v", "eta"};

enum class Param : std::size_t { w = 0, r = 1, v = 2, eta = 3 };

std::array<double, kNumParams> to_array(const GlobalParams& p);
GlobalParams from_array(const std::array<double, kNumParams>& a);
double get(const GlobalParams& p, Param which);
Param param_from_name(std::string_view name);

/// Constants that are not estimated.
struct FixedParams {
  double kappa = 0.01;  ///< half-width of the uniform external rotational noise (rad)
  double sigma = 0.05;  ///< positional diffusion coefficient (m/sqrt(s))

  friend bool operator==(const FixedParams&, const FixedParams&) = default;
};

struct SimConfig {
  std::uint32_t num_agents = 49;
  std::uint32_t num_beacons = 8;
  std::uint32_t num_steps = 600;
  double dt = 0.1;
  std::uint64_t seed = 0;
  /// Re-run nearest-beacon assignment every step instead of freezing it at onset.
  bool reassign_beacons = false;

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

struct BetaPrior {
  double alpha;
  double beta;
};

struct LogNormalPrior {
  double mu;
  double s;
};

/// Independent marginals under complete pooling.
struct PriorSpec {
  BetaPrior w{2.0, 2.0};
  LogNormalPrior r{0.0, 0.5};
  BetaPrior v{2.0, 2.0};
  BetaPrior eta{2.0, 5.0};
};

GlobalParams sample_prior(const PriorSpec& prior, Rng& rng);

/// Sum of the four marginal log densities; -inf outside the support.
double prior_log_density(const PriorSpec& prior, const GlobalParams& params);

/// Marginal log density of a single parameter.
double prior_log_density(const PriorSpec& prior, Param which, double value);

/// Analytic marginal variance, used as the reference for posterior contraction.
double prior_variance(const PriorSpec& prior, Param which);
double prior_mean(const PriorSpec& prior, Param which);
double prior_median(const PriorSpec& prior, Param which);

/// Returns one message per violated invariant; empty when the parameters are valid.
std::vector<std::string> validate_params(const GlobalParams& params);
std::vector<std::string> validate_fixed(const FixedParams& fixed);
std::vector<std::string> validate_config(const SimConfig& config);

}  // namespace roomswarm
