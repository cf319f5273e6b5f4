#include "weibcv/mle.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "weibcv/errors.hpp"

namespace weibcv {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kKappaLower = 0.05;
constexpr double kKappaUpper = 50.0;

// t^kappa and its kappa-derivatives, with 0 * ln 0 = 0 at t = 0.
struct Power {
  double value;    // t^k
  double d1;       // t^k ln t
  double d2;       // t^k ln^2 t
};

Power power_terms(double t, double kappa) {
  if (t == 0.0) return {0.0, 0.0, 0.0};
  const double value = std::pow(t, kappa);
  const double lt = std::log(t);
  return {value, value * lt, value * lt * lt};
}

// Per-sample sums needed by the score and Hessian. Failure terms involve
// 1 - exp(-tau D) written as -expm1(-tau D).
struct Sums {
  // sum X D / c, sum X Dk / c with c = 1 - exp(-tau D)
  double fd = 0.0;
  double fdk = 0.0;
  // sum X D^2 E / c^2, sum X D Dk E / c^2, sum X Dk^2 E / c^2, sum X Dkk / c
  double fdd = 0.0;
  double fddk = 0.0;
  double fdkdk = 0.0;
  double fdkk = 0.0;
  // sum (X + W) t^k, t^k ln t, t^k ln^2 t
  double r0 = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
  bool finite = true;
};

Sums accumulate(const WeibullParams& p, const CensoredSample& sample) {
  Sums s;
  Power prev = power_terms(0.0, p.kappa);
  for (std::size_t i = 0; i < sample.intervals(); ++i) {
    const Power cur = power_terms(sample.upper(i), p.kappa);
    const double x = sample.failures()[i];
    const double units = x + sample.withdrawals()[i];
    s.r0 += units * cur.value;
    s.r1 += units * cur.d1;
    s.r2 += units * cur.d2;
    if (x > 0) {
      const double d = cur.value - prev.value;
      const double dk = cur.d1 - prev.d1;
      const double dkk = cur.d2 - prev.d2;
      const double c = -std::expm1(-p.tau * d);
      const double e = std::exp(-p.tau * d);
      const double c2 = c * c;
      s.fd += x * d / c;
      s.fdk += x * dk / c;
      s.fdkk += x * dkk / c;
      s.fdd += x * d * d * e / c2;
      s.fddk += x * d * dk * e / c2;
      s.fdkdk += x * dk * dk * e / c2;
    }
    prev = cur;
  }
  for (double v : {s.fd, s.fdk, s.fdd, s.fddk, s.fdkdk, s.fdkk, s.r0, s.r1, s.r2}) {
    if (!std::isfinite(v)) s.finite = false;
  }
  return s;
}

// Likelihood equations scaled as l1 = score_kappa / tau,
// l2 = score_tau, and their Jacobian.
struct LikelihoodEquations {
  Vector2 value;
  Matrix2 jacobian;
  bool finite;
};

LikelihoodEquations likelihood_equations(const WeibullParams& p, const CensoredSample& sample) {
  const Sums s = accumulate(p, sample);
  LikelihoodEquations eq;
  eq.value = {s.fdk - s.r1, s.fd - s.r0};
  eq.jacobian.kk = s.fdkk - p.tau * s.fdkdk - s.r2;
  eq.jacobian.kt = -s.fddk;
  eq.jacobian.tk = s.fdk - p.tau * s.fddk - s.r1;
  eq.jacobian.tt = -s.fdd;
  eq.finite = s.finite;
  return eq;
}

FitResult finish_fit(const CensoredSample& sample, WeibullParams params, int iterations,
                     bool converged, std::string diagnostic) {
  FitResult fit;
  fit.params = params;
  fit.iterations = iterations;
  fit.converged = converged;
  fit.diagnostic = std::move(diagnostic);
  fit.loglik = log_likelihood(params, sample);
  if (params.admissible() && params.kappa >= kMinCvKappa) {
    fit.cv_p = cv_p(params.kappa);
    fit.cv_k = cv_k(params.kappa);
  } else {
    fit.cv_p = fit.cv_k = std::numeric_limits<double>::quiet_NaN();
  }
  return fit;
}

}  // namespace

double log_likelihood(const WeibullParams& params, const CensoredSample& sample) {
  if (!params.admissible()) return kNegInf;
  double total = 0.0;
  double prev = 0.0;
  for (std::size_t i = 0; i < sample.intervals(); ++i) {
    const double cur = std::pow(sample.upper(i), params.kappa);
    const int x = sample.failures()[i];
    if (x > 0) {
      const double z = params.tau * (cur - prev);
      if (!(z > 0.0)) return kNegInf;
      // ln(exp(z) - 1) = z + ln(1 - exp(-z))
      total += x * (z + std::log(-std::expm1(-z)));
    }
    total -= params.tau * (x + sample.withdrawals()[i]) * cur;
    prev = cur;
  }
  return std::isfinite(total) ? total : kNegInf;
}

Vector2 score(const WeibullParams& params, const CensoredSample& sample) {
  if (!params.admissible()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan};
  }
  const Sums s = accumulate(params, sample);
  return {params.tau * (s.fdk - s.r1), s.fd - s.r0};
}

InfoMatrix observed_information(const WeibullParams& params, const CensoredSample& sample) {
  params.validate();
  const Sums s = accumulate(params, sample);
  if (!s.finite) {
    throw NumericalError("observed information is not finite at the given parameters");
  }
  const double hkk = params.tau * (s.fdkk - params.tau * s.fdkdk - s.r2);
  const double hkt = s.fdk - params.tau * s.fddk - s.r1;
  const double htt = -s.fdd;
  return {-hkk, -hkt, -hkt, -htt};
}

Matrix2 covariance(const InfoMatrix& info) {
  const double det = info.determinant();
  const double scale = std::abs(info.kk * info.tt) + std::abs(info.kt * info.tk);
  if (!std::isfinite(det) || det == 0.0 || std::abs(det) <= 1e-14 * scale) {
    std::ostringstream msg;
    msg << "information matrix is singular (|det| = " << std::abs(det) << ")";
    throw NumericalError(msg.str());
  }
  return {info.tt / det, -info.kt / det, -info.tk / det, info.kk / det};
}

FitResult newton_raphson(const CensoredSample& sample, const WeibullParams& init,
                         const NewtonOptions& options) {
  init.validate();
  sample.require_failures("newton_raphson");
  WeibullParams current = init;
  for (int iter = 1; iter <= options.max_iter; ++iter) {
    const LikelihoodEquations eq = likelihood_equations(current, sample);
    if (!eq.finite) {
      return finish_fit(sample, current, iter - 1, false,
                        "likelihood equations not finite at the current iterate");
    }
    const double det = eq.jacobian.determinant();
    if (!std::isfinite(det) || std::abs(det) < 1e-300) {
      std::ostringstream msg;
      msg << "singular Jacobian (|det| = " << std::abs(det) << ") at iteration " << iter;
      return finish_fit(sample, current, iter - 1, false, msg.str());
    }
    const Matrix2& j = eq.jacobian;
    double step_k = (j.tt * eq.value[0] - j.kt * eq.value[1]) / det;
    double step_t = (-j.tk * eq.value[0] + j.kk * eq.value[1]) / det;
    // The tau step is also held to a relative bound so tiny rates are resolved.
    const bool small = std::abs(step_k) <= options.tol &&
                       std::abs(step_t) <= options.tol * std::min(1.0, current.tau);

    WeibullParams next{current.kappa - step_k, current.tau - step_t};
    int halvings = 0;
    while ((!next.admissible() || log_likelihood(next, sample) == kNegInf) && halvings < 30) {
      step_k *= 0.5;
      step_t *= 0.5;
      next = {current.kappa - step_k, current.tau - step_t};
      ++halvings;
    }
    if (!next.admissible()) {
      return finish_fit(sample, current, iter, false,
                        "step could not be pulled back into the admissible region");
    }
    current = next;
    if (small && halvings == 0) {
      const Vector2 g = score(current, sample);
      const bool at_root =
          std::max(std::abs(current.kappa * g[0]), std::abs(current.tau * g[1])) <= options.score_tol;
      return finish_fit(sample, current, iter, at_root,
                        at_root ? "" : "step converged but score exceeds tolerance");
    }
  }
  return finish_fit(sample, current, options.max_iter, false, "iteration limit reached");
}

double equivalent_failure_time(double tau, double a, double b) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw DomainError("equivalent_failure_time: tau must be positive and finite");
  }
  if (!(a >= 0.0) || !std::isfinite(a) || !(b > a)) {
    throw DomainError("equivalent_failure_time: need 0 <= a < b");
  }
  if (std::isinf(b)) return a + 1.0 / tau;
  // a + 1/tau - delta / (exp(tau delta) - 1), after factoring exp(-tau a) out
  // of the ratio of shifted exponentials.
  const double delta = b - a;
  const double u = tau * delta;
  double offset = 0.0;
  if (u < 1e-4) {
    // 1/tau (1 - u / expm1(u)) = delta (1/2 - u/12 + u^3/720)
    offset = delta * (0.5 - u / 12.0 + u * u * u / 720.0);
  } else {
    offset = 1.0 / tau - delta / std::expm1(u);
  }
  return std::clamp(a + offset, std::nextafter(a, b), std::nextafter(b, a));
}

FitResult fit_alternative_mle(const CensoredSample& sample, const AlternativeMleOptions& options) {
  sample.require_failures("fit_alternative_mle");
  const std::size_t m = sample.intervals();
  const double failures = sample.total_failures();

  double kappa_prev = midpoint_initial_estimates(sample).kappa;
  double kappa_hat = kappa_prev;
  double tau_hat = midpoint_profile_tau(sample, kappa_prev);
  bool inner_converged = false;
  std::vector<double> lower(m), upper(m);

  for (int outer = 1; outer <= options.max_outer; ++outer) {
    for (std::size_t i = 0; i < m; ++i) {
      lower[i] = i == 0 ? 0.0 : std::pow(sample.lower(i), kappa_prev);
      upper[i] = std::pow(sample.upper(i), kappa_prev);
    }
    double tau_prev = midpoint_profile_tau(sample, kappa_prev);
    inner_converged = false;
    for (int inner = 0; inner < options.max_inner; ++inner) {
      double exposure = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        if (sample.failures()[i] > 0) {
          exposure += sample.failures()[i] * equivalent_failure_time(tau_prev, lower[i], upper[i]);
        }
        exposure += sample.withdrawals()[i] * upper[i];
      }
      tau_hat = failures / exposure;
      if (std::abs(tau_hat - tau_prev) < options.tol) {
        inner_converged = true;
        break;
      }
      tau_prev = tau_hat;
    }

    auto negative = [&](double kappa) {
      const double v = log_likelihood({kappa, tau_hat}, sample);
      return std::isfinite(v) ? -v : std::numeric_limits<double>::max();
    };
    kappa_hat = boost::math::tools::brent_find_minima(negative, kKappaLower, kKappaUpper, 30).first;

    if (std::abs(kappa_hat - kappa_prev) < options.tol) {
      return finish_fit(sample, {kappa_hat, tau_hat}, outer, inner_converged,
                        inner_converged ? "" : "inner tau iteration limit reached");
    }
    kappa_prev = kappa_hat;
  }
  return finish_fit(sample, {kappa_hat, tau_hat}, options.max_outer, false,
                    "outer iteration limit reached");
}

const char* to_string(Target target) {
  switch (target) {
    case Target::kKappa: return "kappa";
    case Target::kTau: return "tau";
    case Target::kCvP: return "cv_p";
    case Target::kCvK: return "cv_k";
  }
  return "?";
}

double target_value(const WeibullParams& params, Target target) {
  switch (target) {
    case Target::kKappa: return params.kappa;
    case Target::kTau: return params.tau;
    case Target::kCvP: return cv_p(params.kappa);
    case Target::kCvK: return cv_k(params.kappa);
  }
  return 0.0;
}

double delta_variance(const WeibullParams& params, const Matrix2& cov, Target target,
                      bool log_scale) {
  double variance = 0.0;
  switch (target) {
    case Target::kKappa: variance = cov.kk; break;
    case Target::kTau: variance = cov.tt; break;
    case Target::kCvP: {
      const double d = cv_p_dkappa(params.kappa);
      variance = d * d * cov.kk;
      break;
    }
    case Target::kCvK: {
      const double d = cv_k_dkappa(params.kappa);
      variance = d * d * cov.kk;
      break;
    }
  }
  if (log_scale) {
    const double g = target_value(params, target);
    if (g == 0.0) throw DomainError("delta_variance: log of a zero estimate");
    variance /= g * g;
  }
  return variance;
}

namespace {

double z_for(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw DomainError("confidence level must lie in (0, 1)");
  }
  return normal_quantile(1.0 - 0.5 * (1.0 - level));
}

}  // namespace

IntervalEstimate aci(double estimate, double variance, double level) {
  const double z = z_for(level);
  if (!(variance >= 0.0)) throw DomainError("aci: variance must be non-negative");
  const double half = z * std::sqrt(variance);
  return {std::max(0.0, estimate - half), estimate + half, level};
}

IntervalEstimate maci(double estimate, double variance, double level) {
  const double z = z_for(level);
  if (!(estimate > 0.0)) throw DomainError("maci: estimate must be positive");
  if (!(variance >= 0.0)) throw DomainError("maci: variance must be non-negative");
  const double factor = std::exp(z * std::sqrt(variance) / estimate);
  return {estimate / factor, estimate * factor, level};
}

}  // namespace weibcv
