#pragma once

namespace weibcv {

// Two-parameter Weibull with cdf F(t) = 1 - exp(-tau * t^kappa).
// kappa is the shape (dimensionless), tau the rate (time^-kappa).
struct WeibullParams {
  double kappa = 1.0;
  double tau = 1.0;

  // Throws DomainError unless both parameters are finite and positive.
  void validate() const;
  bool admissible() const noexcept;
};

// Smallest shape accepted by the CV formulas; Gamma(1 + 2/kappa) overflows
// near kappa = 0.006.
inline constexpr double kMinCvKappa = 0.05;

double cdf(const WeibullParams& params, double t);
double survival(const WeibullParams& params, double t);
double pdf(const WeibullParams& params, double t);
double quantile(const WeibullParams& params, double p);

// Special functions, x > 0.
double log_gamma(double x);
double digamma(double x);

// Inverse of the standard normal cdf, p in (0, 1).
double normal_quantile(double p);

// Pearson CV (sd / mean) and Kvalseth CV (sd / sqrt(E[T^2])) of the Weibull;
// both depend on the shape only.
double cv_p(double kappa);
double cv_k(double kappa);

// Analytic derivatives with respect to kappa, used by the delta method.
double cv_p_dkappa(double kappa);
double cv_k_dkappa(double kappa);

}  // namespace weibcv
