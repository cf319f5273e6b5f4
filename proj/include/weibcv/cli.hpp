#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "weibcv/bayes.hpp"
#include "weibcv/censoring.hpp"
#include "weibcv/montecarlo.hpp"

namespace weibcv::cli {

enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitData = 3, kExitNumerical = 4 };

enum class Format { kTable, kCsv, kJson };

// Plasma cell myeloma follow-up data (112 patients, nine inspections).
CensoredSample real_dataset();

struct McmcSettings {
  Prior prior = Prior::jeffreys_prior();
  double sigma = 5e-5;  // diagonal proposal variance
  bool tune = false;
  long burn_in = 10'000;
  long thin = 100;
  long retained = 4'500;
};

struct AnalysisSettings {
  std::vector<Method> methods{Method::kMle};
  std::vector<IntervalMethod> intervals;
  double level = 0.95;
  int B = 2000;
  McmcSettings mcmc;
  bool alternative_mle = false;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

struct Analysis {
  std::map<Method, EstimateSet> estimates;
  std::map<IntervalMethod, std::map<Target, IntervalEstimate>> intervals;
  std::optional<double> acceptance_rate;
  std::optional<double> tuned_sigma;
  int bootstrap_failures = 0;
};

// Runs the requested estimators and intervals. Randomness comes from named
// sub-streams of settings.seed.
Analysis analyze(const CensoredSample& sample, const AnalysisSettings& settings);

void print_analysis(const Analysis& analysis, Format format, std::ostream& out);

struct FitArgs {
  std::filesystem::path input;
  bool bundled = false;  // use real_dataset() instead of input
  AnalysisSettings settings;
  Format format = Format::kTable;
  std::optional<std::filesystem::path> output;
};

struct SimulateArgs {
  WeibullParams params{1.25, 0.525};
  CensoringScheme scheme = standard_scheme(SchemeKind::kI, 4);
  int n = 200;
  std::uint64_t seed = 0;
  WithdrawalRounding rounding = WithdrawalRounding::kFloor;
  std::optional<std::filesystem::path> output;
};

struct StudyArgs {
  std::filesystem::path config;
  std::filesystem::path out_dir = ".";
  std::optional<unsigned> threads;
};

struct DemoArgs {
  std::uint64_t seed = 0;
  Format format = Format::kTable;
  int B = 2000;
  std::optional<std::filesystem::path> output;
};

// Each command reports errors on `err` and returns an ExitCode.
int cmd_fit(const FitArgs& args, std::ostream& out, std::ostream& err);
int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err);
int cmd_study(const StudyArgs& args, std::ostream& out, std::ostream& err);
int cmd_demo(const DemoArgs& args, std::ostream& out, std::ostream& err);

// Parses argv and dispatches to a subcommand.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace weibcv::cli
