#include "roomswarm/params.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/distributions/beta.hpp>
#include <boost/random/beta_distribution.hpp>
#include <boost/random/lognormal_distribution.hpp>

namespace roomswarm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double beta_log_pdf(const BetaPrior& b, double x) {
  // Support is the open interval; the boundary is treated as outside.
  if (!(x > 0.0 && x < 1.0)) return kNegInf;
  return std::log(boost::math::pdf(boost::math::beta_distribution<>(b.alpha, b.beta), x));
}

double lognormal_log_pdf(const LogNormalPrior& ln, double x) {
  if (!(x > 0.0) || !std::isfinite(x)) return kNegInf;
  const double z = (std::log(x) - ln.mu) / ln.s;
  return -0.5 * z * z - std::log(x * ln.s) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double beta_variance(const BetaPrior& b) {
  const double ab = b.alpha + b.beta;
  return b.alpha * b.beta / (ab * ab * (ab + 1.0));
}

}  // namespace

std::array<double, kNumParams> to_array(const GlobalParams& p) { return {p.w, p.r, p.v, p.eta}; }

GlobalParams from_array(const std::array<double, kNumParams>& a) {
  return GlobalParams{a[0], a[1], a[2], a[3]};
}

double get(const GlobalParams& p, Param which) {
  return to_array(p)[static_cast<std::size_t>(which)];
}

Param param_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNumParams; ++i) {
    if (kParamNames[i] == name) return static_cast<Param>(i);
  }
  throw std::invalid_argument("unknown parameter name '" + std::string(name) + "'");
}

GlobalParams sample_prior(const PriorSpec& prior, Rng& rng) {
  // Fixed draw order: w, r, v, eta.
  GlobalParams p;
  p.w = boost::random::beta_distribution<double>(prior.w.alpha, prior.w.beta)(rng);
  p.r = boost::random::lognormal_distribution<double>(prior.r.mu, prior.r.s)(rng);
  p.v = boost::random::beta_distribution<double>(prior.v.alpha, prior.v.beta)(rng);
  p.eta = boost::random::beta_distribution<double>(prior.eta.alpha, prior.eta.beta)(rng);
  return p;
}

double prior_log_density(const PriorSpec& prior, Param which, double value) {
  switch (which) {
    case Param::w: return beta_log_pdf(prior.w, value);
    case Param::r: return lognormal_log_pdf(prior.r, value);
    case Param::v: return beta_log_pdf(prior.v, value);
    case Param::eta: return beta_log_pdf(prior.eta, value);
  }
  return kNegInf;
}

double prior_log_density(const PriorSpec& prior, const GlobalParams& params) {
  double total = 0.0;
  for (std::size_t i = 0; i < kNumParams; ++i) {
    const double lp = prior_log_density(prior, static_cast<Param>(i), to_array(params)[i]);
    if (lp == kNegInf) return kNegInf;
    total += lp;
  }
  return total;
}

double prior_variance(const PriorSpec& prior, Param which) {
  switch (which) {
    case Param::w: return beta_variance(prior.w);
    case Param::v: return beta_variance(prior.v);
    case Param::eta: return beta_variance(prior.eta);
    case Param::r: {
      const double s2 = prior.r.s * prior.r.s;
      return std::expm1(s2) * std::exp(2.0 * prior.r.mu + s2);
    }
  }
  return 0.0;
}

double prior_mean(const PriorSpec& prior, Param which) {
  auto beta_mean = [](const BetaPrior& b) { return b.alpha / (b.alpha + b.beta); };
  switch (which) {
    case Param::w: return beta_mean(prior.w);
    case Param::v: return beta_mean(prior.v);
    case Param::eta: return beta_mean(prior.eta);
    case Param::r: return std::exp(prior.r.mu + 0.5 * prior.r.s * prior.r.s);
  }
  return 0.0;
}

double prior_median(const PriorSpec& prior, Param which) {
  switch (which) {
    case Param::w: return boost::math::median(boost::math::beta_distribution<>(prior.w.alpha, prior.w.beta));
    case Param::v: return boost::math::median(boost::math::beta_distribution<>(prior.v.alpha, prior.v.beta));
    case Param::eta:
      return boost::math::median(boost::math::beta_distribution<>(prior.eta.alpha, prior.eta.beta));
    case Param::r: return std::exp(prior.r.mu);
  }
  return 0.0;
}

std::vector<std::string> validate_params(const GlobalParams& p) {
  std::vector<std::string> out;
  if (!(p.w >= 0.0 && p.w <= 1.0)) out.emplace_back("w out of range: expected 0 <= w <= 1");
  if (!(p.r > 0.0) || !std::isfinite(p.r)) out.emplace_back("r not positive: expected r > 0");
  if (!(p.v > 0.0 && p.v < 1.0)) out.emplace_back("v out of range: expected 0 < v < 1");
  if (!(p.eta > 0.0 && p.eta < 1.0)) out.emplace_back("eta out of range: expected 0 < eta < 1");
  return out;
}

std::vector<std::string> validate_fixed(const FixedParams& f) {
  std::vector<std::string> out;
  if (!(f.kappa >= 0.0 && f.kappa <= 0.01)) out.emplace_back("kappa out of range: expected 0 <= kappa <= 0.01");
  if (!(f.sigma >= 0.0) || !std::isfinite(f.sigma)) out.emplace_back("sigma negative: expected sigma >= 0");
  return out;
}

std::vector<std::string> validate_config(const SimConfig& c) {
  std::vector<std::string> out;
  if (c.num_agents < 1) out.emplace_back("A must be >= 1");
  if (c.num_beacons < 1) out.emplace_back("B must be >= 1");
  if (c.num_steps < 1) out.emplace_back("T must be >= 1");
  if (!(c.dt > 0.0) || !std::isfinite(c.dt)) out.emplace_back("dt must be > 0");
  return out;
}

}  // namespace roomswarm
