#include "weibcv/distribution.hpp"

#include <cmath>
#include <string>

#include "weibcv/errors.hpp"

namespace weibcv {

namespace {

void require_cv_kappa(double kappa) {
  if (!std::isfinite(kappa) || kappa <= 0.0) {
    throw DomainError("shape must be positive and finite, got " + std::to_string(kappa));
  }
  if (kappa < kMinCvKappa) {
    throw RangeError("Gamma(1 + 2/kappa) not representable: kappa = " +
                     std::to_string(kappa) + " is below the guard " +
                     std::to_string(kMinCvKappa));
  }
}

// ln Gamma(1 + 1/kappa) and ln Gamma(1 + 2/kappa).
struct GammaTerms {
  double lg1;
  double lg2;
};

GammaTerms gamma_terms(double kappa) {
  return {log_gamma(1.0 + 1.0 / kappa), log_gamma(1.0 + 2.0 / kappa)};
}

}  // namespace

bool WeibullParams::admissible() const noexcept {
  return std::isfinite(kappa) && std::isfinite(tau) && kappa > 0.0 && tau > 0.0;
}

void WeibullParams::validate() const {
  if (!admissible()) {
    throw DomainError("Weibull parameters must be finite and positive (kappa = " +
                      std::to_string(kappa) + ", tau = " + std::to_string(tau) + ")");
  }
}

double cdf(const WeibullParams& params, double t) {
  params.validate();
  if (!std::isfinite(t) || t < 0.0) {
    throw DomainError("cdf: time must be finite and non-negative, got " + std::to_string(t));
  }
  if (t == 0.0) return 0.0;
  return -std::expm1(-params.tau * std::pow(t, params.kappa));
}

double survival(const WeibullParams& params, double t) {
  params.validate();
  if (!std::isfinite(t) || t < 0.0) {
    throw DomainError("survival: time must be finite and non-negative, got " +
                      std::to_string(t));
  }
  if (t == 0.0) return 1.0;
  return std::exp(-params.tau * std::pow(t, params.kappa));
}

double pdf(const WeibullParams& params, double t) {
  params.validate();
  if (!std::isfinite(t) || t <= 0.0) {
    throw DomainError("pdf: time must be positive and finite, got " + std::to_string(t));
  }
  const double tk = std::pow(t, params.kappa);
  return params.kappa * params.tau * tk / t * std::exp(-params.tau * tk);
}

double quantile(const WeibullParams& params, double p) {
  params.validate();
  if (!(p >= 0.0 && p < 1.0)) {
    throw DomainError("quantile: probability must lie in [0, 1), got " + std::to_string(p));
  }
  if (p == 0.0) return 0.0;
  return std::pow(-std::log1p(-p) / params.tau, 1.0 / params.kappa);
}

double cv_p(double kappa) {
  require_cv_kappa(kappa);
  const auto [lg1, lg2] = gamma_terms(kappa);
  // Gamma(1+2/k)/Gamma(1+1/k)^2 - 1, formed as expm1 of the log ratio.
  return std::sqrt(std::expm1(lg2 - 2.0 * lg1));
}

double cv_k(double kappa) {
  require_cv_kappa(kappa);
  const auto [lg1, lg2] = gamma_terms(kappa);
  return std::sqrt(-std::expm1(2.0 * lg1 - lg2));
}

double cv_p_dkappa(double kappa) {
  require_cv_kappa(kappa);
  const auto [lg1, lg2] = gamma_terms(kappa);
  const double psi_diff = digamma(1.0 + 1.0 / kappa) - digamma(1.0 + 2.0 / kappa);
  // Gamma(1+2/k) / Gamma(1+1/k)^2, the ratio that appears in the derivative.
  const double ratio = std::exp(lg2 - 2.0 * lg1);
  return ratio * psi_diff / (kappa * kappa * cv_p(kappa));
}

double cv_k_dkappa(double kappa) {
  require_cv_kappa(kappa);
  const auto [lg1, lg2] = gamma_terms(kappa);
  const double psi_diff = digamma(1.0 + 1.0 / kappa) - digamma(1.0 + 2.0 / kappa);
  // Gamma(1+1/k)^2 / Gamma(1+2/k).
  const double ratio = std::exp(2.0 * lg1 - lg2);
  return ratio * psi_diff / (kappa * kappa * cv_k(kappa));
}

}  // namespace weibcv
