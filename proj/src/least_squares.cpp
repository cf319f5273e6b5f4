#include "weibcv/least_squares.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "parallel.hpp"
#include "weibcv/errors.hpp"

namespace weibcv {

namespace {

constexpr std::uint64_t kBootstrapStream = 0xB007;
constexpr std::array<Target, 4> kTargets = {Target::kKappa, Target::kTau, Target::kCvP,
                                            Target::kCvK};

FitResult make_fit(const CensoredSample* sample, WeibullParams params, int iterations,
                   bool converged, std::string diagnostic = {}) {
  if (!params.admissible()) {
    throw NumericalError("least-squares fit produced inadmissible parameters (kappa = " +
                         std::to_string(params.kappa) + ", tau = " + std::to_string(params.tau) +
                         ")");
  }
  if (params.kappa < kMinCvKappa) {
    throw NumericalError("least-squares shape " + std::to_string(params.kappa) +
                         " is below the CV guard " + std::to_string(kMinCvKappa));
  }
  FitResult fit;
  fit.params = params;
  fit.cv_p = cv_p(params.kappa);
  fit.cv_k = cv_k(params.kappa);
  fit.iterations = iterations;
  fit.converged = converged;
  fit.diagnostic = std::move(diagnostic);
  fit.loglik = sample ? log_likelihood(params, *sample) : 0.0;
  return fit;
}

struct MinimizerDeleter {
  void operator()(gsl_multimin_fminimizer* s) const { gsl_multimin_fminimizer_free(s); }
};
struct VectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};
using MinimizerPtr = std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter>;
using VectorPtr = std::unique_ptr<gsl_vector, VectorDeleter>;

struct ObjectiveContext {
  const CensoredSample* sample;
  const std::vector<double>* f_hat;
  NllseObjective objective;
};

double objective_callback(const gsl_vector* xi, void* raw) {
  const auto* ctx = static_cast<const ObjectiveContext*>(raw);
  const WeibullParams p{std::exp(gsl_vector_get(xi, 0)), std::exp(gsl_vector_get(xi, 1))};
  const double value = nllse_objective(p, *ctx->sample, *ctx->f_hat, ctx->objective);
  return std::isfinite(value) ? value : std::numeric_limits<double>::max() / 4;
}

// GSL's default handler aborts; errors are reported through return codes instead.
void disable_gsl_abort() {
  static const bool once = [] {
    gsl_set_error_handler_off();
    return true;
  }();
  (void)once;
}

}  // namespace

FitResult llse_from_cdf(const std::vector<double>& boundaries, const std::vector<double>& f_hat) {
  const std::size_t m = boundaries.size();
  if (m < 2) throw PreconditionError("llse: at least two inspection times are needed");
  if (f_hat.size() != m) throw DomainError("llse: CDF estimate length differs from boundaries");
  std::vector<double> x(m), y(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(f_hat[i] > 0.0 && f_hat[i] < 1.0)) {
      throw DomainError("llse: CDF estimate F[" + std::to_string(i + 1) + "] = " +
                        std::to_string(f_hat[i]) + " is outside (0, 1)");
    }
    if (!(boundaries[i] > 0.0)) throw DomainError("llse: inspection times must be positive");
    x[i] = std::log(boundaries[i]);
    y[i] = std::log(-std::log1p(-f_hat[i]));
  }
  double x_mean = 0.0, y_mean = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    x_mean += x[i];
    y_mean += y[i];
  }
  x_mean /= m;
  y_mean /= m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - x_mean) * (x[i] - x_mean);
    sxy += (x[i] - x_mean) * (y[i] - y_mean);
  }
  if (!(sxx > 0.0)) throw PreconditionError("llse: inspection times give a rank-deficient design");
  const double slope = sxy / sxx;
  const double intercept = y_mean - slope * x_mean;
  return make_fit(nullptr, {slope, std::exp(intercept)}, 0, true);
}

FitResult llse(const CensoredSample& sample) {
  FitResult fit = llse_from_cdf(sample.boundaries(), f_hat_moments(sample));
  fit.loglik = log_likelihood(fit.params, sample);
  return fit;
}

const char* to_string(NllseObjective objective) {
  return objective == NllseObjective::kWeighted ? "weighted" : "expanded";
}

double nllse_objective(const WeibullParams& params, const CensoredSample& sample,
                       const std::vector<double>& f_hat, NllseObjective objective) {
  const std::size_t m = sample.intervals();
  if (f_hat.size() != m) throw DomainError("nllse: CDF estimate length differs from sample");
  if (!params.admissible()) return std::numeric_limits<double>::infinity();
  double total = 0.0;
  double model_prev = 0.0;  // F(t_0) = 0
  double hat_prev = 0.0;    // F^_0 = 0
  for (std::size_t i = 0; i < m; ++i) {
    const double model = -std::expm1(-params.tau * std::pow(sample.upper(i), params.kappa));
    const double x = sample.failures()[i];
    const double w = sample.withdrawals()[i];
    if (objective == NllseObjective::kWeighted) {
      const double jump = (model - model_prev) - (f_hat[i] - hat_prev);
      const double surv = (1.0 - model) - (1.0 - f_hat[i]);
      total += x * jump * jump + w * surv * surv;
    } else {
      const double here = model - f_hat[i];
      const double before = model_prev - hat_prev;
      total += (x + w) * here * here - x * before * before;
    }
    model_prev = model;
    hat_prev = f_hat[i];
  }
  return total;
}

FitResult nllse_from_cdf(const CensoredSample& sample, const std::vector<double>& f_hat,
                         const WeibullParams& start, const NllseOptions& options) {
  start.validate();
  if (sample.intervals() < 2) {
    throw PreconditionError("nllse: at least two inspection times are needed");
  }
  disable_gsl_abort();
  ObjectiveContext ctx{&sample, &f_hat, options.objective};
  gsl_multimin_function fn{&objective_callback, 2, &ctx};

  VectorPtr x(gsl_vector_alloc(2));
  VectorPtr step(gsl_vector_alloc(2));
  gsl_vector_set(x.get(), 0, std::log(start.kappa));
  gsl_vector_set(x.get(), 1, std::log(start.tau));
  gsl_vector_set_all(step.get(), 0.1);

  MinimizerPtr solver(gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 2));
  if (gsl_multimin_fminimizer_set(solver.get(), &fn, x.get(), step.get()) != GSL_SUCCESS) {
    throw NumericalError("nllse: objective is not finite at the starting point");
  }

  double previous = solver->fval;
  bool converged = false;
  int iter = 0;
  std::string diagnostic;
  while (iter < options.max_iter) {
    ++iter;
    const int status = gsl_multimin_fminimizer_iterate(solver.get());
    if (status != GSL_SUCCESS) {
      diagnostic = std::string("Nelder-Mead stopped: ") + gsl_strerror(status);
      break;
    }
    const double size = gsl_multimin_fminimizer_size(solver.get());
    const double improvement = previous - solver->fval;
    previous = solver->fval;
    if (size < options.step_tol && std::abs(improvement) < options.objective_tol) {
      converged = true;
      break;
    }
  }
  if (!converged && diagnostic.empty()) diagnostic = "iteration limit reached";
  const gsl_vector* best = gsl_multimin_fminimizer_x(solver.get());
  return make_fit(&sample, {std::exp(gsl_vector_get(best, 0)), std::exp(gsl_vector_get(best, 1))},
                  iter, converged, diagnostic);
}

FitResult nllse(const CensoredSample& sample, const NllseOptions& options) {
  const FitResult start = llse(sample);
  return nllse_from_cdf(sample, f_hat_moments(sample), start.params, options);
}

const char* to_string(LsEstimator estimator) {
  return estimator == LsEstimator::kLinear ? "llse" : "nllse";
}

FitResult fit_least_squares(const CensoredSample& sample, LsEstimator estimator,
                            const NllseOptions& options) {
  return estimator == LsEstimator::kLinear ? llse(sample) : nllse(sample, options);
}

std::pair<std::size_t, std::size_t> percentile_indices(std::size_t replicates, double level) {
  if (replicates == 0) throw DomainError("percentile interval of an empty distribution");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must lie in (0, 1)");
  const double beta = 1.0 - level;
  const double b = static_cast<double>(replicates);
  // Snap values within rounding noise of an integer before floor/ceil.
  auto snap = [](double v) {
    const double r = std::round(v);
    return std::abs(v - r) < 1e-9 ? r : v;
  };
  const double lo = std::floor(snap(beta * b / 2.0));
  const double hi = std::ceil(snap((1.0 - beta / 2.0) * b));
  const auto lower = static_cast<std::size_t>(std::clamp(lo, 1.0, b));
  const auto upper = static_cast<std::size_t>(std::clamp(hi, 1.0, b));
  return {lower, upper};
}

IntervalEstimate percentile_interval(const BootstrapDistribution& dist, double level) {
  const auto [lower, upper] = percentile_indices(dist.size(), level);
  return {dist.values[lower - 1], dist.values[upper - 1], level};
}

PbiResult pbi(const CensoredSample& sample, LsEstimator estimator, const BootstrapOptions& options) {
  if (options.replicates < 1) throw DomainError("pbi: number of resamples must be positive");
  PbiResult result;
  result.original = fit_least_squares(sample, estimator, options.nllse);
  if (!result.original.converged) {
    throw NumericalError(std::string("pbi: ") + to_string(estimator) +
                         " did not converge on the original sample");
  }
  const CensoringScheme scheme = options.scheme ? *options.scheme : empirical_scheme(sample);
  scheme.validate();

  const auto replicates = static_cast<std::size_t>(options.replicates);
  const int budget = 10 * options.replicates;
  std::vector<FitResult> fits(replicates);
  std::vector<int> attempts(replicates, 0);

  detail::parallel_for(
      replicates,
      [&](std::size_t b) {
        Rng rng = make_stream(options.seed, kBootstrapStream, b);
        while (attempts[b] < budget) {
          ++attempts[b];
          const CensoredSample resample =
              generate_sample(result.original.params, scheme, sample.n(), rng, options.rounding);
          try {
            FitResult fit = fit_least_squares(resample, estimator, options.nllse);
            if (fit.converged) {
              fits[b] = std::move(fit);
              return;
            }
          } catch (const std::exception&) {
            // counted as a failed attempt and redrawn
          }
        }
      },
      options.threads);

  long long total_attempts = 0;
  for (int a : attempts) total_attempts += a;
  result.failed_attempts = static_cast<int>(total_attempts - options.replicates);
  if (total_attempts > budget ||
      std::any_of(fits.begin(), fits.end(), [](const FitResult& f) { return !f.converged; })) {
    throw NumericalError("pbi: redraw budget exhausted; " + std::to_string(result.failed_attempts) +
                         " of " + std::to_string(total_attempts) + " bootstrap fits failed");
  }

  for (Target target : kTargets) {
    BootstrapDistribution dist;
    dist.values.reserve(replicates);
    for (const FitResult& fit : fits) {
      switch (target) {
        case Target::kKappa: dist.values.push_back(fit.params.kappa); break;
        case Target::kTau: dist.values.push_back(fit.params.tau); break;
        case Target::kCvP: dist.values.push_back(fit.cv_p); break;
        case Target::kCvK: dist.values.push_back(fit.cv_k); break;
      }
    }
    std::sort(dist.values.begin(), dist.values.end());
    result.intervals[target] = percentile_interval(dist, options.level);
    result.distributions[target] = std::move(dist);
  }
  return result;
}

}  // namespace weibcv
