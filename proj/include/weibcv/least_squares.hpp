#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "weibcv/censoring.hpp"
#include "weibcv/mle.hpp"

namespace weibcv {

// Linear least squares on the Weibull probability plot:
// ln(-ln(1 - F_i)) = ln tau + kappa ln t_i, with F_i from f_hat_moments.
FitResult llse(const CensoredSample& sample);

// Same regression for an arbitrary CDF estimate at the given boundaries.
FitResult llse_from_cdf(const std::vector<double>& boundaries, const std::vector<double>& f_hat);

enum class NllseObjective {
  // sum X_i [dF_i - dF^_i]^2 + sum W_i [S(t_i) - S^_i]^2
  kWeighted,
  // sum (X_i + W_i)[F(t_i) - F^_i]^2 - X_i [F(t_{i-1}) - F^_{i-1}]^2; may be negative
  kExpanded,
};

const char* to_string(NllseObjective objective);

// Objective value at params for a CDF estimate aligned with the sample (F^_0 = 0).
double nllse_objective(const WeibullParams& params, const CensoredSample& sample,
                       const std::vector<double>& f_hat, NllseObjective objective);

struct NllseOptions {
  NllseObjective objective = NllseObjective::kWeighted;
  int max_iter = 5000;
  double objective_tol = 1e-12;
  double step_tol = 1e-8;
};

// Minimizes the objective over (ln kappa, ln tau) with Nelder-Mead from `start`.
FitResult nllse_from_cdf(const CensoredSample& sample, const std::vector<double>& f_hat,
                         const WeibullParams& start, const NllseOptions& options = {});

// Moments CDF estimate, started from the LLSE point.
FitResult nllse(const CensoredSample& sample, const NllseOptions& options = {});

enum class LsEstimator { kLinear, kNonlinear };

const char* to_string(LsEstimator estimator);

FitResult fit_least_squares(const CensoredSample& sample, LsEstimator estimator,
                            const NllseOptions& options = {});

// Sorted bootstrap replicates of one statistic.
struct BootstrapDistribution {
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
};

// 1-based order-statistic indices (lower, upper) for B replicates at the
// given level: floor(beta B / 2) and ceil((1 - beta/2) B), clamped to [1, B].
std::pair<std::size_t, std::size_t> percentile_indices(std::size_t replicates, double level);

IntervalEstimate percentile_interval(const BootstrapDistribution& dist, double level);

struct BootstrapOptions {
  int replicates = 2000;
  double level = 0.95;
  std::uint64_t seed = 0;
  // Resampling scheme; defaults to the sample's empirical withdrawal proportions.
  std::optional<CensoringScheme> scheme;
  WithdrawalRounding rounding = WithdrawalRounding::kFloor;
  NllseOptions nllse;
  unsigned threads = 0;
};

struct PbiResult {
  FitResult original;
  std::map<Target, BootstrapDistribution> distributions;
  std::map<Target, IntervalEstimate> intervals;
  int failed_attempts = 0;
};

// Parametric percentile bootstrap around the least-squares fit. Failed
// re-estimates are redrawn; more than 10 B total attempts is a NumericalError.
PbiResult pbi(const CensoredSample& sample, LsEstimator estimator,
              const BootstrapOptions& options = {});

}  // namespace weibcv
