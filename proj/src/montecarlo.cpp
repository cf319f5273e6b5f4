#include "weibcv/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "parallel.hpp"
#include "weibcv/errors.hpp"

namespace weibcv {

namespace {

constexpr std::uint64_t kStudyStream = 0x5717D;
constexpr int kMaxEstimationAttempts = 10;
constexpr long kMaxRejections = 1000;
constexpr double kUnreliableRate = 0.2;

struct EstimationFailure {
  std::string who;
};

EstimateSet to_estimates(const WeibullParams& p) {
  return {p.kappa, p.tau, cv_p(p.kappa), cv_k(p.kappa)};
}

double component(const EstimateSet& e, Target target) {
  switch (target) {
    case Target::kKappa: return e.kappa;
    case Target::kTau: return e.tau;
    case Target::kCvP: return e.cv_p;
    case Target::kCvK: return e.cv_k;
  }
  return 0.0;
}

bool wants(const StudyConfig& c, IntervalMethod m) { return c.intervals.count(m) > 0; }
bool wants(const StudyConfig& c, Method m) { return c.methods.count(m) > 0; }

// Runs every selected estimator on one sample; throws EstimationFailure naming
// the first one that fails.
ReplicationOutcome estimate_all(const CensoredSample& sample, const StudyConfig& config, Rng& rng) {
  ReplicationOutcome out;
  auto guarded = [](const std::string& who, auto&& body) {
    try {
      return body();
    } catch (const EstimationFailure&) {
      throw;
    } catch (const std::exception&) {
      throw EstimationFailure{who};
    }
  };

  if (wants(config, Method::kMle) || wants(config, IntervalMethod::kAci) ||
      wants(config, IntervalMethod::kMaci)) {
    const FitResult fit = guarded("mle", [&] {
      FitResult f = newton_raphson(sample, midpoint_initial_estimates(sample));
      if (!f.converged) throw NumericalError("newton did not converge");
      return f;
    });
    if (wants(config, Method::kMle)) out.estimates[Method::kMle] = to_estimates(fit.params);
    if (wants(config, IntervalMethod::kAci) || wants(config, IntervalMethod::kMaci)) {
      guarded("mle_covariance", [&] {
        const Matrix2 cov = covariance(observed_information(fit.params, sample));
        for (Target target : kAllTargets) {
          const double est = target_value(fit.params, target);
          const double var = delta_variance(fit.params, cov, target, false);
          if (wants(config, IntervalMethod::kAci)) {
            out.intervals[IntervalMethod::kAci][target] = aci(est, var, config.level);
          }
          if (wants(config, IntervalMethod::kMaci)) {
            out.intervals[IntervalMethod::kMaci][target] = maci(est, var, config.level);
          }
        }
        return 0;
      });
    }
  }

  const std::pair<Method, LsEstimator> ls_methods[] = {{Method::kLlse, LsEstimator::kLinear},
                                                       {Method::kNllse, LsEstimator::kNonlinear}};
  for (const auto& [method, estimator] : ls_methods) {
    if (!wants(config, method)) continue;
    const FitResult fit = guarded(to_string(method), [&] {
      FitResult f = fit_least_squares(sample, estimator);
      if (!f.converged) throw NumericalError("least squares did not converge");
      return f;
    });
    out.estimates[method] = to_estimates(fit.params);
  }

  const std::pair<IntervalMethod, LsEstimator> pbi_methods[] = {
      {IntervalMethod::kPbiL, LsEstimator::kLinear}, {IntervalMethod::kPbiNl, LsEstimator::kNonlinear}};
  for (const auto& [method, estimator] : pbi_methods) {
    if (!wants(config, method)) continue;
    BootstrapOptions options;
    options.replicates = config.B;
    options.level = config.level;
    options.seed = rng();
    options.rounding = config.rounding;
    options.threads = 1;
    const PbiResult result = guarded(to_string(method), [&] { return pbi(sample, estimator, options); });
    out.intervals[method] = result.intervals;
  }

  if (wants(config, Method::kBayes) || wants(config, IntervalMethod::kHpdi)) {
    const McmcChain chain = guarded("bayes", [&] {
      const WeibullParams mid = midpoint_initial_estimates(sample);
      const double sk = config.proposal_scale * mid.kappa;
      const double st = config.proposal_scale * mid.tau;
      const TuneResult tuned =
          tune_sigma(sample, config.prior, {sk * sk, 0.0, 0.0, st * st}, config.pilot_M, rng, mid);
      RwmhOptions options;
      options.iterations = config.M;
      options.burn_in = config.M_b;
      options.thin = 1;
      options.sigma = tuned.sigma;
      options.init = mid;
      return rwmh(sample, config.prior, options, rng);
    });
    if (wants(config, Method::kBayes)) out.estimates[Method::kBayes] = bayes_estimate(chain);
    if (wants(config, IntervalMethod::kHpdi)) {
      guarded("hpdi", [&] {
        for (Target target : kAllTargets) {
          std::vector<double> values = chain.values(target);
          std::sort(values.begin(), values.end());
          out.intervals[IntervalMethod::kHpdi][target] = hpdi(values, config.level);
        }
        return 0;
      });
    }
  }
  return out;
}

struct ReplicationRecord {
  std::optional<ReplicationOutcome> outcome;
  long rejected = 0;
  long attempts = 0;
  std::map<std::string, long> failures;
};

ReplicationRecord run_replication(const StudyConfig& config, std::size_t index,
                                  const StudyHooks& hooks) {
  ReplicationRecord record;
  Rng rng = make_stream(config.seed, kStudyStream, index);
  while (record.attempts < kMaxEstimationAttempts && record.rejected <= kMaxRejections) {
    const CensoredSample sample =
        generate_sample(config.params_truth, config.scheme, config.n, rng, config.rounding);
    if (terminated_early(sample) || !sample.has_failures()) {
      ++record.rejected;
      continue;
    }
    ++record.attempts;
    try {
      ReplicationOutcome outcome = estimate_all(sample, config, rng);
      if (hooks.after_replication) hooks.after_replication(config.params_truth, outcome);
      record.outcome = std::move(outcome);
      return record;
    } catch (const EstimationFailure& failure) {
      ++record.failures[failure.who];
    }
  }
  return record;
}

}  // namespace

const char* to_string(Method method) {
  switch (method) {
    case Method::kMle: return "mle";
    case Method::kLlse: return "llse";
    case Method::kNllse: return "nllse";
    case Method::kBayes: return "bayes";
  }
  return "?";
}

const char* to_string(IntervalMethod method) {
  switch (method) {
    case IntervalMethod::kAci: return "aci";
    case IntervalMethod::kMaci: return "maci";
    case IntervalMethod::kPbiL: return "pbi_l";
    case IntervalMethod::kPbiNl: return "pbi_nl";
    case IntervalMethod::kHpdi: return "hpdi";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::kMle, Method::kLlse, Method::kNllse, Method::kBayes}) {
    if (name == to_string(m)) return m;
  }
  throw DomainError("unknown estimation method '" + name + "' (expected mle, llse, nllse or bayes)");
}

IntervalMethod parse_interval_method(const std::string& name) {
  for (IntervalMethod m : {IntervalMethod::kAci, IntervalMethod::kMaci, IntervalMethod::kPbiL,
                           IntervalMethod::kPbiNl, IntervalMethod::kHpdi}) {
    if (name == to_string(m)) return m;
  }
  throw DomainError("unknown interval method '" + name +
                    "' (expected aci, maci, pbi_l, pbi_nl or hpdi)");
}

Target parse_target(const std::string& name) {
  for (Target t : kAllTargets) {
    if (name == to_string(t)) return t;
  }
  throw DomainError("unknown target '" + name + "'");
}

CensoringScheme standard_scheme(SchemeKind kind, int m) {
  if (m < 2) throw DomainError("standard schemes need at least two inspection times");
  CensoringScheme scheme;
  scheme.boundaries.resize(static_cast<std::size_t>(m));
  std::iota(scheme.boundaries.begin(), scheme.boundaries.end(), 1.0);
  scheme.proportions.assign(static_cast<std::size_t>(m), 0.0);
  switch (kind) {
    case SchemeKind::kI: break;
    case SchemeKind::kII: scheme.proportions[0] = 0.5; break;
    case SchemeKind::kIII: {
      const double p = m <= 4 ? 0.5 : 0.1;
      std::fill(scheme.proportions.begin(), scheme.proportions.end() - 1, p);
      break;
    }
  }
  scheme.proportions.back() = 1.0;
  return scheme;
}

const char* to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::kI: return "I";
    case SchemeKind::kII: return "II";
    case SchemeKind::kIII: return "III";
  }
  return "?";
}

SchemeKind parse_scheme_kind(const std::string& name) {
  for (SchemeKind k : {SchemeKind::kI, SchemeKind::kII, SchemeKind::kIII}) {
    if (name == to_string(k)) return k;
  }
  throw DomainError("unknown scheme '" + name + "' (expected I, II or III)");
}

void StudyConfig::validate() const {
  params_truth.validate();
  scheme.validate();
  if (n < 1) throw DomainError("study: n must be positive");
  if (L < 1) throw DomainError("study: L must be at least 1");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("study: level must lie in (0, 1)");
  if (methods.empty() && intervals.empty()) throw DomainError("study: nothing to estimate");
  if (wants(*this, IntervalMethod::kPbiL) || wants(*this, IntervalMethod::kPbiNl)) {
    if (B < 1) throw DomainError("study: B must be positive");
  }
  if (wants(*this, Method::kBayes) || wants(*this, IntervalMethod::kHpdi)) {
    prior.validate();
    if (M_b < 0 || M_b >= M) throw DomainError("study: need 0 <= M_b < M");
    if (pilot_M < 1000) throw DomainError("study: pilot_M must be at least 1000");
    if (!(proposal_scale > 0.0)) throw DomainError("study: proposal_scale must be positive");
  }
}

double mse(const std::vector<double>& values, double truth) {
  if (values.empty()) throw DomainError("mse of an empty set");
  double sum = 0.0;
  for (double v : values) sum += (v - truth) * (v - truth);
  return sum / static_cast<double>(values.size());
}

double coverage(const std::vector<IntervalEstimate>& intervals, double truth) {
  if (intervals.empty()) throw DomainError("coverage of an empty set");
  std::size_t hits = 0;
  for (const IntervalEstimate& iv : intervals) hits += iv.contains(truth) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(intervals.size());
}

double avg_width(const std::vector<IntervalEstimate>& intervals) {
  if (intervals.empty()) throw DomainError("average width of an empty set");
  double sum = 0.0;
  for (const IntervalEstimate& iv : intervals) sum += iv.width();
  return sum / static_cast<double>(intervals.size());
}

StudyReport run_study(const StudyConfig& config, const StudyHooks& hooks) {
  config.validate();
  const auto count = static_cast<std::size_t>(config.L);
  std::vector<ReplicationRecord> records(count);
  detail::parallel_for(
      count, [&](std::size_t r) { records[r] = run_replication(config, r, hooks); },
      config.threads);

  StudyReport report;
  report.scheme_label = config.scheme_label;
  report.n = config.n;
  report.m = static_cast<int>(config.scheme.boundaries.size());
  report.replications_requested = config.L;

  std::map<Method, std::map<Target, std::vector<double>>> values;
  std::map<IntervalMethod, std::map<Target, std::vector<IntervalEstimate>>> intervals;
  for (const ReplicationRecord& record : records) {
    report.rejected_samples += record.rejected;
    report.estimation_attempts += record.attempts;
    for (const auto& [who, n] : record.failures) report.estimator_failures[who] += n;
    if (!record.outcome) continue;
    ++report.replications_used;
    for (const auto& [method, est] : record.outcome->estimates) {
      for (Target t : kAllTargets) values[method][t].push_back(component(est, t));
    }
    for (const auto& [method, by_target] : record.outcome->intervals) {
      for (const auto& [t, iv] : by_target) intervals[method][t].push_back(iv);
    }
  }

  const WeibullParams& truth = config.params_truth;
  for (const auto& [method, by_target] : values) {
    for (const auto& [t, v] : by_target) report.mse[method][t] = mse(v, target_value(truth, t));
  }
  for (const auto& [method, by_target] : intervals) {
    for (const auto& [t, v] : by_target) {
      report.intervals[method][t] = {coverage(v, target_value(truth, t)), avg_width(v)};
    }
  }
  for (const auto& [who, n] : report.estimator_failures) {
    report.unreliable[who] = report.estimation_attempts > 0 &&
                             static_cast<double>(n) / static_cast<double>(report.estimation_attempts) >
                                 kUnreliableRate;
  }
  return report;
}

std::vector<StudyReport> run_grid(const StudyGrid& grid, const StudyHooks& hooks) {
  if (grid.schemes.empty() || grid.sizes.empty()) throw DomainError("study grid is empty");
  std::vector<StudyReport> reports;
  for (const auto& [label, scheme] : grid.schemes) {
    for (int n : grid.sizes) {
      StudyConfig cell = grid.base;
      cell.scheme = scheme;
      cell.scheme_label = label;
      cell.n = n;
      reports.push_back(run_study(cell, hooks));
    }
  }
  return reports;
}

}  // namespace weibcv
