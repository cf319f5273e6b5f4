#pragma once

#include <cmath>
#include <iosfwd>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "weibcv/censoring.hpp"
#include "weibcv/errors.hpp"
#include "weibcv/mle.hpp"

namespace weibcv {

// Independent gamma priors kappa ~ Gamma(a1, a2), tau ~ Gamma(b1, b2) (shape,
// rate). The Jeffreys prior 1/(kappa tau) is the all-zero limit.
struct Prior {
  double a1 = 0.0;
  double a2 = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
  bool jeffreys = true;

  static Prior jeffreys_prior() { return {}; }
  static Prior gamma(double a1, double a2, double b1, double b2) {
    return {a1, a2, b1, b2, false};
  }
  void validate() const;
};

// log prior + log_likelihood, up to an additive constant; -inf outside the
// support.
double log_posterior(const WeibullParams& params, const CensoredSample& sample, const Prior& prior);

struct ChainState {
  long iteration = 0;  // 1-based index d of the generating MH step
  double kappa = 0.0;
  double tau = 0.0;
  double cv_p = 0.0;
  double cv_k = 0.0;
};

struct McmcChain {
  std::vector<ChainState> states;  // retained after burn-in and thinning
  long total_iterations = 0;
  long burn_in = 0;
  long thin = 1;
  double acceptance_rate = 0.0;    // over all proposals

  std::vector<double> values(Target target) const;
};

struct RwmhOptions {
  long iterations = 10'000;
  long burn_in = 1'000;
  long thin = 1;
  Matrix2 sigma{5e-5, 0.0, 0.0, 5e-5};
  // Defaults to the midpoint estimates.
  std::optional<WeibullParams> init;
};

// Metropolis-Hastings acceptance for a symmetric proposal.
inline bool metropolis_accept(double log_current, double log_proposed, Rng& rng) {
  if (log_proposed == -std::numeric_limits<double>::infinity()) return false;
  const double log_ratio = log_proposed - log_current;
  if (log_ratio >= 0.0) return true;
  const double u = std::generate_canonical<double, 53>(rng);
  return std::log(u) < log_ratio;
}

// Lower Cholesky factor of a 2x2 proposal covariance; DomainError when it is
// not symmetric positive definite.
Matrix2 proposal_factor(const Matrix2& sigma);

// Gaussian random walk over (kappa, tau) for an arbitrary log density.
// visit(d, state, accepted) is called after each of the M steps.
template <typename LogDensity, typename Visit>
long random_walk(LogDensity&& log_density, Vector2 state, const Matrix2& sigma, long steps,
                 Rng& rng, Visit&& visit) {
  const Matrix2 chol = proposal_factor(sigma);
  std::normal_distribution<double> normal(0.0, 1.0);
  double current = log_density(state);
  if (!std::isfinite(current)) {
    throw DomainError("random walk started outside the support of the target");
  }
  long accepted = 0;
  for (long d = 1; d <= steps; ++d) {
    const double e1 = normal(rng);
    const double e2 = normal(rng);
    const Vector2 proposal{state[0] + chol.kk * e1, state[1] + chol.tk * e1 + chol.tt * e2};
    const double candidate = log_density(proposal);
    const bool accept = metropolis_accept(current, candidate, rng);
    if (accept) {
      state = proposal;
      current = candidate;
      ++accepted;
    }
    visit(d, state, accept);
  }
  return accepted;
}

// Random-walk Metropolis-Hastings on the posterior. The support is truncated
// to kappa >= kMinCvKappa so every retained state has defined CVs.
McmcChain rwmh(const CensoredSample& sample, const Prior& prior, const RwmhOptions& options,
               Rng& rng);

struct EstimateSet {
  double kappa = 0.0;
  double tau = 0.0;
  double cv_p = 0.0;
  double cv_k = 0.0;
};

// Posterior means of each coordinate over the retained states.
EstimateSet bayes_estimate(const McmcChain& chain);

// Shortest window [v_h, v_{h+k}], k = floor(M' level), over sorted values;
// ties go to the smallest h.
IntervalEstimate hpdi(std::span<const double> sorted, double level);

struct TuneResult {
  Matrix2 sigma;
  double acceptance_rate = 0.0;
  int rounds = 0;
};

// Pilot runs of pilot_iterations steps, halving or doubling the proposal
// covariance until acceptance falls in [0.25, 0.40]; at most 40 rounds.
TuneResult tune_sigma(const CensoredSample& sample, const Prior& prior, const Matrix2& initial,
                      long pilot_iterations, Rng& rng,
                      std::optional<WeibullParams> init = std::nullopt);

// iter,kappa,tau,cv_p,cv_k for each retained state.
void write_chain_csv(const McmcChain& chain, std::ostream& out);

}  // namespace weibcv
