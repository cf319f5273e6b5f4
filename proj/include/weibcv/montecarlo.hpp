#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "weibcv/bayes.hpp"
#include "weibcv/censoring.hpp"
#include "weibcv/least_squares.hpp"
#include "weibcv/mle.hpp"

namespace weibcv {

enum class Method { kMle, kLlse, kNllse, kBayes };
enum class IntervalMethod { kAci, kMaci, kPbiL, kPbiNl, kHpdi };

const char* to_string(Method method);
const char* to_string(IntervalMethod method);
// DomainError on an unknown name.
Method parse_method(const std::string& name);
IntervalMethod parse_interval_method(const std::string& name);
Target parse_target(const std::string& name);

inline constexpr Target kAllTargets[] = {Target::kKappa, Target::kTau, Target::kCvP, Target::kCvK};

enum class SchemeKind { kI, kII, kIII };

// The three withdrawal patterns on inspection times 1, 2, ..., m (m >= 2).
CensoringScheme standard_scheme(SchemeKind kind, int m);
const char* to_string(SchemeKind kind);
SchemeKind parse_scheme_kind(const std::string& name);

struct StudyConfig {
  WeibullParams params_truth{1.25, 0.525};
  CensoringScheme scheme = standard_scheme(SchemeKind::kI, 4);
  std::string scheme_label = "I";
  int n = 200;
  int L = 300;
  int B = 500;
  long M = 10'000;
  long M_b = 1'000;
  Prior prior = Prior::jeffreys_prior();
  double level = 0.95;
  std::set<Method> methods{Method::kMle, Method::kLlse, Method::kNllse, Method::kBayes};
  std::set<IntervalMethod> intervals{IntervalMethod::kAci, IntervalMethod::kMaci,
                                     IntervalMethod::kPbiL, IntervalMethod::kPbiNl,
                                     IntervalMethod::kHpdi};
  std::uint64_t seed = 0;
  // Initial proposal standard deviations relative to the midpoint estimates,
  // refined by tune_sigma on every replication.
  double proposal_scale = 0.1;
  long pilot_M = 1000;
  WithdrawalRounding rounding = WithdrawalRounding::kFloor;
  unsigned threads = 0;

  void validate() const;
};

// Results of one replication, keyed by method and target.
struct ReplicationOutcome {
  std::map<Method, EstimateSet> estimates;
  std::map<IntervalMethod, std::map<Target, IntervalEstimate>> intervals;
};

struct StudyHooks {
  // Called on every successful replication before aggregation.
  std::function<void(const WeibullParams& truth, ReplicationOutcome&)> after_replication;
};

struct IntervalMetrics {
  double coverage = 0.0;
  double avg_width = 0.0;
};

struct StudyReport {
  std::string scheme_label;
  int n = 0;
  int m = 0;
  int replications_requested = 0;
  int replications_used = 0;
  long rejected_samples = 0;       // premature termination or no failures
  std::map<Method, std::map<Target, double>> mse;
  std::map<IntervalMethod, std::map<Target, IntervalMetrics>> intervals;
  std::map<std::string, long> estimator_failures;
  std::map<std::string, bool> unreliable;  // failure rate above 20%
  long estimation_attempts = 0;

  bool complete() const noexcept { return replications_used == replications_requested; }
};

StudyReport run_study(const StudyConfig& config, const StudyHooks& hooks = {});

double mse(const std::vector<double>& values, double truth);
double coverage(const std::vector<IntervalEstimate>& intervals, double truth);
double avg_width(const std::vector<IntervalEstimate>& intervals);

// A grid over schemes and sample sizes sharing every other setting.
struct StudyGrid {
  StudyConfig base;
  std::vector<std::pair<std::string, CensoringScheme>> schemes;
  std::vector<int> sizes;
};

std::vector<StudyReport> run_grid(const StudyGrid& grid, const StudyHooks& hooks = {});

// JSON config mirroring StudyConfig field names. "scheme" is either
// {"boundaries": [...], "proportions": [...]} or {"kind": "I", "m": 4};
// "schemes" (a list) and "n" (a list) expand into a grid.
StudyGrid parse_study_config(const std::string& json_text);

void write_report_csv(const std::vector<StudyReport>& reports, std::ostream& out);
void write_report_json(const std::vector<StudyReport>& reports, std::ostream& out);

}  // namespace weibcv
