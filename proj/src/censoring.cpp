#include "weibcv/censoring.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "weibcv/errors.hpp"

namespace weibcv {

namespace {

constexpr double kKappaLower = 0.05;
constexpr double kKappaUpper = 50.0;

int checked_sum(const std::vector<int>& failures, const std::vector<int>& withdrawals) {
  long long total = 0;
  for (std::size_t i = 0; i < failures.size(); ++i) {
    total += failures[i];
    total += withdrawals[i];
  }
  if (total > std::numeric_limits<int>::max()) throw DataError("sample size overflows int");
  return static_cast<int>(total);
}

}  // namespace

CensoredSample::CensoredSample(std::vector<double> boundaries, std::vector<int> failures,
                               std::vector<int> withdrawals, int n)
    : boundaries_(std::move(boundaries)),
      failures_(std::move(failures)),
      withdrawals_(std::move(withdrawals)),
      n_(n) {
  const std::size_t m = boundaries_.size();
  if (m == 0) throw DataError("sample has no inspection times");
  if (failures_.size() != m || withdrawals_.size() != m) {
    throw DataError("sample vectors differ in length: t has " + std::to_string(m) +
                    ", X has " + std::to_string(failures_.size()) + ", W has " +
                    std::to_string(withdrawals_.size()));
  }
  double previous = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double t = boundaries_[i];
    if (!std::isfinite(t) || t <= previous) {
      throw DataError("inspection times must be finite, positive and strictly increasing "
                      "(t[" + std::to_string(i) + "] = " + std::to_string(t) + ")");
    }
    previous = t;
    if (failures_[i] < 0) throw DataError("X[" + std::to_string(i) + "] is negative");
    if (withdrawals_[i] < 0) throw DataError("W[" + std::to_string(i) + "] is negative");
  }
  if (n_ <= 0) throw DataError("n must be positive, got " + std::to_string(n_));
  const int total = checked_sum(failures_, withdrawals_);
  if (total != n_) {
    throw DataError("sum(X + W) = " + std::to_string(total) + " does not equal n = " +
                    std::to_string(n_));
  }
}

CensoredSample::CensoredSample(std::vector<double> boundaries, std::vector<int> failures,
                               std::vector<int> withdrawals)
    : CensoredSample(boundaries, failures, withdrawals,
                     failures.size() == withdrawals.size() ? checked_sum(failures, withdrawals)
                                                           : -1) {}

int CensoredSample::total_failures() const noexcept {
  return std::accumulate(failures_.begin(), failures_.end(), 0);
}

int CensoredSample::at_risk(std::size_t i) const noexcept {
  int removed = 0;
  for (std::size_t k = 0; k < i; ++k) removed += failures_[k] + withdrawals_[k];
  return n_ - removed;
}

void CensoredSample::require_failures(const char* who) const {
  if (!has_failures()) {
    throw PreconditionError(std::string(who) + ": sample has no failures (sum X = 0)");
  }
}

void CensoringScheme::validate() const {
  if (boundaries.empty()) throw DataError("scheme has no inspection times");
  if (boundaries.size() != proportions.size()) {
    throw DataError("scheme has " + std::to_string(boundaries.size()) +
                    " inspection times but " + std::to_string(proportions.size()) +
                    " withdrawal proportions");
  }
  double previous = 0.0;
  for (std::size_t i = 0; i < boundaries.size(); ++i) {
    if (!std::isfinite(boundaries[i]) || boundaries[i] <= previous) {
      throw DataError("scheme inspection times must be positive and strictly increasing");
    }
    previous = boundaries[i];
    const double p = proportions[i];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw DataError("withdrawal proportion p[" + std::to_string(i) + "] = " +
                      std::to_string(p) + " outside [0, 1]");
    }
  }
  if (proportions.back() != 1.0) {
    throw DataError("last withdrawal proportion must be 1 (all survivors withdrawn at t_m)");
  }
}

Rng make_stream(std::uint64_t base_seed, std::uint64_t tag, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(base_seed), static_cast<std::uint32_t>(base_seed >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

CensoredSample generate_sample(const WeibullParams& params, const CensoringScheme& scheme,
                               int n, Rng& rng, WithdrawalRounding rounding) {
  params.validate();
  scheme.validate();
  if (n < 1) throw DomainError("generate_sample: n must be at least 1");

  const std::size_t m = scheme.boundaries.size();
  std::vector<int> failures(m, 0);
  std::vector<int> withdrawals(m, 0);
  int remaining = n;
  double previous_power = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double power = std::pow(scheme.boundaries[i], params.kappa);
    // (F(t_i) - F(t_{i-1})) / (1 - F(t_{i-1})) = 1 - exp(-tau (t_i^k - t_{i-1}^k))
    const double q = std::clamp(-std::expm1(-params.tau * (power - previous_power)), 0.0, 1.0);
    previous_power = power;
    int x = 0;
    if (remaining > 0) {
      std::binomial_distribution<int> draw(remaining, q);
      x = draw(rng);
    }
    const int alive = remaining - x;
    const double share = scheme.proportions[i] * alive;
    // The snap keeps floor(W / a * a) == W for proportions recovered from counts.
    int w = rounding == WithdrawalRounding::kFloor ? static_cast<int>(std::floor(share + 1e-9))
                                                   : static_cast<int>(std::lround(share));
    w = std::clamp(w, 0, alive);
    failures[i] = x;
    withdrawals[i] = w;
    remaining = alive - w;
  }
  // With p_m = 1 nobody is left; a scheme whose last proportion rounds short
  // still has every unit recorded.
  withdrawals[m - 1] += remaining;
  return CensoredSample(scheme.boundaries, std::move(failures), std::move(withdrawals), n);
}

bool terminated_early(const CensoredSample& sample) {
  const std::size_t m = sample.intervals();
  int remaining = sample.n();
  for (std::size_t i = 0; i + 1 < m; ++i) {
    remaining -= sample.failures()[i] + sample.withdrawals()[i];
    if (remaining == 0) return true;
  }
  return false;
}

CensoringScheme empirical_scheme(const CensoredSample& sample) {
  const std::size_t m = sample.intervals();
  CensoringScheme scheme{sample.boundaries(), std::vector<double>(m, 0.0)};
  int remaining = sample.n();
  for (std::size_t i = 0; i < m; ++i) {
    const int alive = remaining - sample.failures()[i];
    if (alive > 0) {
      scheme.proportions[i] = static_cast<double>(sample.withdrawals()[i]) / alive;
    }
    remaining = alive - sample.withdrawals()[i];
  }
  scheme.proportions[m - 1] = 1.0;
  return scheme;
}

std::vector<double> f_hat_moments(const CensoredSample& sample) {
  const std::size_t m = sample.intervals();
  const auto& x = sample.failures();
  const auto& w = sample.withdrawals();

  // Suffix sums over 1-based k = s..m, stored at 0-based index s-1.
  std::vector<double> x_tail(m + 1, 0.0);
  std::vector<double> w_tail(m + 1, 0.0);
  for (std::size_t k = m; k-- > 0;) {
    x_tail[k] = x_tail[k + 1] + x[k];
    w_tail[k] = w_tail[k + 1] + w[k];
  }

  // F_i = 1 - prod_{j=m-i+1}^{m} (sum_{k>=m-j+2} X_k + sum_{k>=m-j+1} W_k + j)
  //                             / (sum_{k>=m-j+1} (X_k + W_k) + j + 1)
  std::vector<double> result(m);
  for (std::size_t i = 1; i <= m; ++i) {
    double survival = 1.0;
    for (std::size_t j = m - i + 1; j <= m; ++j) {
      const std::size_t start = m - j;  // 0-based index of k = m-j+1
      const double numerator = x_tail[start + 1] + w_tail[start] + static_cast<double>(j);
      const double denominator = x_tail[start] + w_tail[start] + static_cast<double>(j) + 1.0;
      survival *= numerator / denominator;
    }
    result[i - 1] = 1.0 - survival;
  }
  return result;
}

KaplanMeierResult f_hat_km(const CensoredSample& sample) {
  const std::size_t m = sample.intervals();
  std::vector<double> result(m);
  double survival = 1.0;
  int remaining = sample.n();
  for (std::size_t i = 0; i < m; ++i) {
    const int x = sample.failures()[i];
    if (remaining > 0) survival *= 1.0 - static_cast<double>(x) / remaining;
    result[i] = 1.0 - survival;
    if (i == 0 && x == 0) {
      return KaplanMeierDefect{KaplanMeierDefect::Kind::kFirstIntervalEmpty, 0};
    }
    if (result[i] >= 1.0) return KaplanMeierDefect{KaplanMeierDefect::Kind::kReachedOne, i};
    remaining -= x + sample.withdrawals()[i];
  }
  return result;
}

std::string describe(const KaplanMeierDefect& defect) {
  switch (defect.kind) {
    case KaplanMeierDefect::Kind::kFirstIntervalEmpty:
      return "no failures in the first interval: F_1 = 0 and ln(-ln(1 - F_1)) is undefined";
    case KaplanMeierDefect::Kind::kReachedOne:
      return "estimate reached 1 at interval " + std::to_string(defect.interval + 1) +
             ": ln(-ln(1 - F)) is undefined";
  }
  return "unknown defect";
}

double midpoint_profile_tau(const CensoredSample& sample, double kappa) {
  double denominator = 0.0;
  for (std::size_t i = 0; i < sample.intervals(); ++i) {
    const double mid = 0.5 * (sample.lower(i) + sample.upper(i));
    denominator += sample.failures()[i] * std::pow(mid, kappa) +
                   sample.withdrawals()[i] * std::pow(sample.upper(i), kappa);
  }
  return sample.total_failures() / denominator;
}

WeibullParams midpoint_initial_estimates(const CensoredSample& sample) {
  sample.require_failures("midpoint_initial_estimates");

  // Profile log-likelihood: with tau profiled out, sum X ln f(m_i) + sum W ln S(t_i)
  // reduces to d ln kappa + d ln tau(kappa) + (kappa - 1) sum X ln m_i - d,
  // where d = sum X.
  const double d = sample.total_failures();
  double sum_log_mid = 0.0;
  for (std::size_t i = 0; i < sample.intervals(); ++i) {
    if (sample.failures()[i] > 0) {
      sum_log_mid += sample.failures()[i] * std::log(0.5 * (sample.lower(i) + sample.upper(i)));
    }
  }
  auto negative_profile = [&](double kappa) {
    const double tau = midpoint_profile_tau(sample, kappa);
    const double value = d * std::log(kappa) + d * std::log(tau) + (kappa - 1.0) * sum_log_mid - d;
    return std::isfinite(value) ? -value : std::numeric_limits<double>::max();
  };
  const auto [kappa, unused] =
      boost::math::tools::brent_find_minima(negative_profile, kKappaLower, kKappaUpper, 40);
  (void)unused;
  return {kappa, midpoint_profile_tau(sample, kappa)};
}

}  // namespace weibcv
