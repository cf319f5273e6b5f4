#pragma once

#include <array>
#include <string>

#include "weibcv/censoring.hpp"
#include "weibcv/distribution.hpp"

namespace weibcv {

// Point estimate from any estimator plus iteration bookkeeping.
struct FitResult {
  WeibullParams params;
  double cv_p = 0.0;
  double cv_k = 0.0;
  int iterations = 0;
  bool converged = false;
  double loglik = 0.0;
  std::string diagnostic;
};

// 2x2 matrix in (kappa, tau) order.
struct Matrix2 {
  double kk = 0.0;
  double kt = 0.0;
  double tk = 0.0;
  double tt = 0.0;

  double determinant() const noexcept { return kk * tt - kt * tk; }
  friend Matrix2 operator*(const Matrix2& a, const Matrix2& b) noexcept {
    return {a.kk * b.kk + a.kt * b.tk, a.kk * b.kt + a.kt * b.tt,
            a.tk * b.kk + a.tt * b.tk, a.tk * b.kt + a.tt * b.tt};
  }
};

using InfoMatrix = Matrix2;
using Vector2 = std::array<double, 2>;

struct IntervalEstimate {
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;

  double width() const noexcept { return upper - lower; }
  bool contains(double value) const noexcept { return lower <= value && value <= upper; }
};

// Log-likelihood up to an additive constant:
//   sum X_i ln(exp(tau D_i) - 1) - tau sum (X_i + W_i) t_i^kappa,  D_i = t_i^k - t_{i-1}^k.
// Returns -infinity for inadmissible parameters or non-finite terms.
double log_likelihood(const WeibullParams& params, const CensoredSample& sample);

// Exact gradient (d/dkappa, d/dtau) of log_likelihood. Non-finite entries
// signal an inadmissible point.
Vector2 score(const WeibullParams& params, const CensoredSample& sample);

// Negated Hessian of log_likelihood.
InfoMatrix observed_information(const WeibullParams& params, const CensoredSample& sample);

// Inverse of the information matrix; NumericalError when it is singular.
Matrix2 covariance(const InfoMatrix& info);

struct NewtonOptions {
  double tol = 1e-6;
  int max_iter = 100;
  // Bound on kappa * dl/dkappa and tau * dl/dtau at the returned point.
  double score_tol = 1e-4;
};

// Newton-Raphson on the likelihood equations, with step halving back into
// kappa, tau > 0 (at most 30 halvings per step).
FitResult newton_raphson(const CensoredSample& sample, const WeibullParams& init,
                         const NewtonOptions& options = {});

// Mean of an Exponential(tau) variate conditioned on (a, b]; b may be +inf.
double equivalent_failure_time(double tau, double a, double b);

struct AlternativeMleOptions {
  double tol = 1e-6;
  int max_outer = 200;
  int max_inner = 500;
};

// Alternating maximization: for fixed kappa, a fixed-point iteration on tau
// using equivalent failure times on the t^kappa scale; then kappa maximizes
// the log-likelihood at that tau. Starts from the midpoint estimates.
FitResult fit_alternative_mle(const CensoredSample& sample,
                              const AlternativeMleOptions& options = {});

enum class Target { kKappa, kTau, kCvP, kCvK };

const char* to_string(Target target);
double target_value(const WeibullParams& params, Target target);

// Delta-method variance of the target (or of its log when log_scale is set).
double delta_variance(const WeibullParams& params, const Matrix2& cov, Target target,
                      bool log_scale = false);

// Symmetric Wald interval with the lower end clamped at 0.
IntervalEstimate aci(double estimate, double variance, double level);

// Log-transformed interval estimate * exp(-/+ z sd / estimate).
IntervalEstimate maci(double estimate, double variance, double level);

}  // namespace weibcv
