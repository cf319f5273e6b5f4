#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "weibcv/distribution.hpp"

namespace weibcv {

// Type-I progressively interval-censored sample.
//
// n units start at t_0 = 0 and are inspected at t_1 < ... < t_m. failures[i]
// counts units that failed in (t_{i-1}, t_i]; withdrawals[i] counts survivors
// removed at t_i. Every unit is accounted for: sum(failures + withdrawals) = n.
// Units still alive at t_m are recorded in the last withdrawal count.
class CensoredSample {
 public:
  // Throws DataError on any structural violation. A sample with no failures is
  // structurally valid; estimators that need failures check has_failures().
  CensoredSample(std::vector<double> boundaries, std::vector<int> failures,
                 std::vector<int> withdrawals, int n);

  // n inferred as sum(failures + withdrawals).
  CensoredSample(std::vector<double> boundaries, std::vector<int> failures,
                 std::vector<int> withdrawals);

  std::size_t intervals() const noexcept { return boundaries_.size(); }
  int n() const noexcept { return n_; }
  const std::vector<double>& boundaries() const noexcept { return boundaries_; }
  const std::vector<int>& failures() const noexcept { return failures_; }
  const std::vector<int>& withdrawals() const noexcept { return withdrawals_; }

  // Left end of interval i (0 for the first interval).
  double lower(std::size_t i) const noexcept { return i == 0 ? 0.0 : boundaries_[i - 1]; }
  double upper(std::size_t i) const noexcept { return boundaries_[i]; }

  int total_failures() const noexcept;
  bool has_failures() const noexcept { return total_failures() > 0; }

  // Units at risk at the start of interval i.
  int at_risk(std::size_t i) const noexcept;

  // Throws PreconditionError when no failures were observed.
  void require_failures(const char* who) const;

  friend bool operator==(const CensoredSample&, const CensoredSample&) = default;

 private:
  std::vector<double> boundaries_;
  std::vector<int> failures_;
  std::vector<int> withdrawals_;
  int n_ = 0;
};

// Inspection times plus the fraction of post-failure survivors withdrawn at
// each inspection. The last proportion must be 1.
struct CensoringScheme {
  std::vector<double> boundaries;
  std::vector<double> proportions;

  // Throws DataError when lengths differ, boundaries are not strictly
  // increasing and positive, a proportion is outside [0, 1], or the last
  // proportion is not 1.
  void validate() const;
};

// How a fractional withdrawal p * survivors is turned into a count.
enum class WithdrawalRounding { kFloor, kRound };

using Rng = std::mt19937_64;

// Independent engine for stream `index` under a base seed. Streams are
// separated by `tag` so different consumers never share a sequence.
Rng make_stream(std::uint64_t base_seed, std::uint64_t tag, std::uint64_t index);

// Sequential binomial generator: X_i ~ Bin(R_{i-1}, q_i) with q_i the
// conditional failure probability of interval i, then W_i = floor(p_i (R_{i-1} - X_i)).
CensoredSample generate_sample(const WeibullParams& params, const CensoringScheme& scheme,
                               int n, Rng& rng,
                               WithdrawalRounding rounding = WithdrawalRounding::kFloor);

// True when the number at risk reached zero before the last inspection.
bool terminated_early(const CensoredSample& sample);

// Withdrawal proportions implied by a sample: p_i = W_i / (R_{i-1} - X_i),
// 0 where nobody was left to withdraw, and p_m = 1.
CensoringScheme empirical_scheme(const CensoredSample& sample);

// Moments-approximation estimate of F(t_1), ..., F(t_m). Defined for every
// valid sample, including ones with empty intervals; each value lies in (0, 1).
std::vector<double> f_hat_moments(const CensoredSample& sample);

// Reasons the product-limit estimate cannot feed a Weibull probability plot.
struct KaplanMeierDefect {
  enum class Kind { kFirstIntervalEmpty, kReachedOne };
  Kind kind;
  std::size_t interval;  // 0-based index where the defect appears
};

using KaplanMeierResult = std::variant<std::vector<double>, KaplanMeierDefect>;

// Product-limit variant F_i = 1 - prod_{j<=i} (1 - X_j / R_{j-1}).
KaplanMeierResult f_hat_km(const CensoredSample& sample);

std::string describe(const KaplanMeierDefect& defect);

// Profile rate of the midpoint pseudo-likelihood at a given shape:
// tau(kappa) = sum X / (sum X_i m_i^kappa + sum W_i t_i^kappa).
double midpoint_profile_tau(const CensoredSample& sample, double kappa);

// Starting values treating failures as exact at interval midpoints and
// withdrawals as right-censored at t_i; kappa searched on [0.05, 50].
WeibullParams midpoint_initial_estimates(const CensoredSample& sample);

}  // namespace weibcv
