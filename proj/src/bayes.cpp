#include "weibcv/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace weibcv {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kBandLow = 0.25;
constexpr double kBandHigh = 0.40;
constexpr int kMaxTuneRounds = 40;

}  // namespace

void Prior::validate() const {
  if (jeffreys) return;
  for (double h : {a1, a2, b1, b2}) {
    if (!(h >= 0.0) || !std::isfinite(h)) {
      throw DomainError("prior hyper-parameters must be finite and non-negative");
    }
  }
}

double log_posterior(const WeibullParams& params, const CensoredSample& sample, const Prior& prior) {
  if (!params.admissible()) return kNegInf;
  const double lk = std::log(params.kappa);
  const double lt = std::log(params.tau);
  double log_prior = 0.0;
  if (prior.jeffreys) {
    log_prior = -lk - lt;
  } else {
    log_prior = (prior.a1 - 1.0) * lk + (prior.b1 - 1.0) * lt - prior.a2 * params.kappa -
                prior.b2 * params.tau;
  }
  const double ll = log_likelihood(params, sample);
  if (ll == kNegInf) return kNegInf;
  return log_prior + ll;
}

std::vector<double> McmcChain::values(Target target) const {
  std::vector<double> out;
  out.reserve(states.size());
  for (const ChainState& s : states) {
    switch (target) {
      case Target::kKappa: out.push_back(s.kappa); break;
      case Target::kTau: out.push_back(s.tau); break;
      case Target::kCvP: out.push_back(s.cv_p); break;
      case Target::kCvK: out.push_back(s.cv_k); break;
    }
  }
  return out;
}

Matrix2 proposal_factor(const Matrix2& sigma) {
  const bool symmetric = std::abs(sigma.kt - sigma.tk) <=
                         1e-12 * std::max({std::abs(sigma.kk), std::abs(sigma.tt), 1e-300});
  if (!symmetric || !(sigma.kk > 0.0) || !std::isfinite(sigma.kk) || !std::isfinite(sigma.tt)) {
    throw DomainError("proposal covariance must be symmetric positive definite");
  }
  const double l11 = std::sqrt(sigma.kk);
  const double l21 = sigma.tk / l11;
  const double rest = sigma.tt - l21 * l21;
  if (!(rest > 0.0)) throw DomainError("proposal covariance must be symmetric positive definite");
  return {l11, 0.0, l21, std::sqrt(rest)};
}

McmcChain rwmh(const CensoredSample& sample, const Prior& prior, const RwmhOptions& options,
               Rng& rng) {
  prior.validate();
  if (options.iterations < 1 || options.burn_in < 0 || options.burn_in >= options.iterations) {
    throw DomainError("rwmh: need 0 <= burn-in < iterations");
  }
  if (options.thin < 1) throw DomainError("rwmh: thinning interval must be positive");
  const WeibullParams init = options.init ? *options.init : midpoint_initial_estimates(sample);
  init.validate();

  auto density = [&](const Vector2& s) {
    if (s[0] < kMinCvKappa) return kNegInf;
    return log_posterior({s[0], s[1]}, sample, prior);
  };

  McmcChain chain;
  chain.total_iterations = options.iterations;
  chain.burn_in = options.burn_in;
  chain.thin = options.thin;
  chain.states.reserve(static_cast<std::size_t>((options.iterations - options.burn_in) / options.thin));

  const long accepted = random_walk(
      density, Vector2{init.kappa, init.tau}, options.sigma, options.iterations, rng,
      [&](long d, const Vector2& s, bool) {
        if (d > options.burn_in && (d - options.burn_in) % options.thin == 0) {
          chain.states.push_back({d, s[0], s[1], cv_p(s[0]), cv_k(s[0])});
        }
      });
  chain.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(options.iterations);
  return chain;
}

EstimateSet bayes_estimate(const McmcChain& chain) {
  if (chain.states.empty()) throw DomainError("bayes_estimate: chain has no retained states");
  EstimateSet sum;
  for (const ChainState& s : chain.states) {
    sum.kappa += s.kappa;
    sum.tau += s.tau;
    sum.cv_p += s.cv_p;
    sum.cv_k += s.cv_k;
  }
  const double n = static_cast<double>(chain.states.size());
  return {sum.kappa / n, sum.tau / n, sum.cv_p / n, sum.cv_k / n};
}

IntervalEstimate hpdi(std::span<const double> sorted, double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("hpdi: level must lie in (0, 1)");
  const std::size_t count = sorted.size();
  if (static_cast<double>(count) * (1.0 - level) < 1.0 - 1e-9) {
    throw DomainError("hpdi: need at least 1/(1 - level) draws, got " + std::to_string(count));
  }
  double raw = static_cast<double>(count) * level;
  if (std::abs(raw - std::round(raw)) < 1e-9) raw = std::round(raw);
  const auto span = static_cast<std::size_t>(std::floor(raw));
  std::size_t best = 0;
  double best_width = sorted[span] - sorted[0];
  for (std::size_t h = 1; h + span < count; ++h) {
    const double width = sorted[h + span] - sorted[h];
    if (width < best_width) {
      best_width = width;
      best = h;
    }
  }
  return {sorted[best], sorted[best + span], level};
}

TuneResult tune_sigma(const CensoredSample& sample, const Prior& prior, const Matrix2& initial,
                      long pilot_iterations, Rng& rng, std::optional<WeibullParams> init) {
  if (pilot_iterations < 1000) throw DomainError("tune_sigma: pilot runs need at least 1000 steps");
  if (!init) init = midpoint_initial_estimates(sample);
  Matrix2 sigma = initial;
  double rate = 0.0;
  for (int round = 1; round <= kMaxTuneRounds; ++round) {
    RwmhOptions pilot;
    pilot.iterations = pilot_iterations;
    pilot.burn_in = 0;
    pilot.thin = pilot_iterations;
    pilot.sigma = sigma;
    pilot.init = init;
    rate = rwmh(sample, prior, pilot, rng).acceptance_rate;
    if (rate >= kBandLow && rate <= kBandHigh) return {sigma, rate, round};
    const double factor = rate < kBandLow ? 0.5 : 2.0;
    sigma = {sigma.kk * factor, sigma.kt * factor, sigma.tk * factor, sigma.tt * factor};
  }
  std::ostringstream msg;
  msg << "tune_sigma: acceptance rate " << rate << " still outside [" << kBandLow << ", "
      << kBandHigh << "] after " << kMaxTuneRounds << " pilot rounds";
  throw NumericalError(msg.str());
}

void write_chain_csv(const McmcChain& chain, std::ostream& out) {
  out << "iter,kappa,tau,cv_p,cv_k\n";
  out.precision(17);
  for (const ChainState& s : chain.states) {
    out << s.iteration << ',' << s.kappa << ',' << s.tau << ',' << s.cv_p << ',' << s.cv_k << '\n';
  }
}

}  // namespace weibcv
