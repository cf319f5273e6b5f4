#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "weibcv/cli.hpp"
#include "weibcv/errors.hpp"
#include "weibcv/least_squares.hpp"
#include "weibcv/sample_io.hpp"

namespace weibcv::cli {

namespace {

// Sub-stream tags derived from the single --seed value.
constexpr std::uint64_t kTagPbiLinear = 1;
constexpr std::uint64_t kTagPbiNonlinear = 2;
constexpr std::uint64_t kTagMcmc = 3;
constexpr std::uint64_t kTagSimulate = 4;
constexpr int kMaxSimulateDraws = 1000;
constexpr long kTunePilot = 5000;

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  Rng rng = make_stream(seed, tag, 0);
  return rng();
}

bool has(const std::vector<IntervalMethod>& v, IntervalMethod m) {
  return std::find(v.begin(), v.end(), m) != v.end();
}
bool has(const std::vector<Method>& v, Method m) { return std::find(v.begin(), v.end(), m) != v.end(); }

EstimateSet to_estimates(const WeibullParams& p) {
  return {p.kappa, p.tau, cv_p(p.kappa), cv_k(p.kappa)};
}

double component(const EstimateSet& e, Target t) {
  switch (t) {
    case Target::kKappa: return e.kappa;
    case Target::kTau: return e.tau;
    case Target::kCvP: return e.cv_p;
    case Target::kCvK: return e.cv_k;
  }
  return 0.0;
}

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const PreconditionError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const RangeError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const DomainError& e) {
    err << "invalid argument: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

// Writes to the file when given, otherwise to `out`.
template <typename Body>
void with_output(const std::optional<std::filesystem::path>& path, std::ostream& out, Body&& body) {
  if (!path) {
    body(out);
    return;
  }
  std::ofstream file(*path, std::ios::binary);
  if (!file) throw DataError("cannot open output file " + path->string());
  body(file);
  if (!file) throw DataError("failed writing " + path->string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void validate(const AnalysisSettings& s) {
  if (s.methods.empty() && s.intervals.empty()) throw DomainError("nothing to compute");
  if (!(s.level > 0.0 && s.level < 1.0)) throw DomainError("level must lie in (0, 1)");
  if (s.B < 1) throw DomainError("bootstrap replicates must be positive");
  s.mcmc.prior.validate();
  if (!(s.mcmc.sigma > 0.0)) throw DomainError("proposal variance must be positive");
  if (s.mcmc.burn_in < 0 || s.mcmc.thin < 1 || s.mcmc.retained < 1) {
    throw DomainError("MCMC sizes must satisfy burn-in >= 0, thin >= 1, retained >= 1");
  }
}

}  // namespace

Analysis analyze(const CensoredSample& sample, const AnalysisSettings& s) {
  validate(s);
  sample.require_failures("analyze");
  Analysis result;

  if (has(s.methods, Method::kMle) || has(s.intervals, IntervalMethod::kAci) ||
      has(s.intervals, IntervalMethod::kMaci)) {
    const FitResult fit = s.alternative_mle
                              ? fit_alternative_mle(sample)
                              : newton_raphson(sample, midpoint_initial_estimates(sample));
    if (!fit.converged) throw NumericalError("mle did not converge: " + fit.diagnostic);
    if (has(s.methods, Method::kMle)) result.estimates[Method::kMle] = to_estimates(fit.params);
    if (has(s.intervals, IntervalMethod::kAci) || has(s.intervals, IntervalMethod::kMaci)) {
      const Matrix2 cov = covariance(observed_information(fit.params, sample));
      for (Target t : kAllTargets) {
        const double est = target_value(fit.params, t);
        const double var = delta_variance(fit.params, cov, t, false);
        if (has(s.intervals, IntervalMethod::kAci)) {
          result.intervals[IntervalMethod::kAci][t] = aci(est, var, s.level);
        }
        if (has(s.intervals, IntervalMethod::kMaci)) {
          result.intervals[IntervalMethod::kMaci][t] = maci(est, var, s.level);
        }
      }
    }
  }

  if (has(s.methods, Method::kLlse)) {
    result.estimates[Method::kLlse] = to_estimates(llse(sample).params);
  }
  if (has(s.methods, Method::kNllse)) {
    const FitResult fit = nllse(sample);
    if (!fit.converged) throw NumericalError("nllse did not converge: " + fit.diagnostic);
    result.estimates[Method::kNllse] = to_estimates(fit.params);
  }

  const std::tuple<IntervalMethod, LsEstimator, std::uint64_t> pbis[] = {
      {IntervalMethod::kPbiL, LsEstimator::kLinear, kTagPbiLinear},
      {IntervalMethod::kPbiNl, LsEstimator::kNonlinear, kTagPbiNonlinear}};
  for (const auto& [method, estimator, tag] : pbis) {
    if (!has(s.intervals, method)) continue;
    BootstrapOptions options;
    options.replicates = s.B;
    options.level = s.level;
    options.seed = derive_seed(s.seed, tag);
    options.threads = s.threads;
    const PbiResult pbi_result = pbi(sample, estimator, options);
    result.intervals[method] = pbi_result.intervals;
    result.bootstrap_failures += pbi_result.failed_attempts;
  }

  if (has(s.methods, Method::kBayes) || has(s.intervals, IntervalMethod::kHpdi)) {
    Rng rng = make_stream(s.seed, kTagMcmc, 0);
    Matrix2 sigma{s.mcmc.sigma, 0.0, 0.0, s.mcmc.sigma};
    if (s.mcmc.tune) sigma = tune_sigma(sample, s.mcmc.prior, sigma, kTunePilot, rng).sigma;
    RwmhOptions options;
    options.burn_in = s.mcmc.burn_in;
    options.thin = s.mcmc.thin;
    options.iterations = s.mcmc.burn_in + s.mcmc.thin * s.mcmc.retained;
    options.sigma = sigma;
    const McmcChain chain = rwmh(sample, s.mcmc.prior, options, rng);
    result.acceptance_rate = chain.acceptance_rate;
    result.tuned_sigma = sigma.kk;
    if (has(s.methods, Method::kBayes)) result.estimates[Method::kBayes] = bayes_estimate(chain);
    if (has(s.intervals, IntervalMethod::kHpdi)) {
      for (Target t : kAllTargets) {
        std::vector<double> values = chain.values(t);
        std::sort(values.begin(), values.end());
        result.intervals[IntervalMethod::kHpdi][t] = hpdi(values, s.level);
      }
    }
  }
  return result;
}

void print_analysis(const Analysis& a, Format format, std::ostream& out) {
  if (format == Format::kJson) {
    nlohmann::json doc;
    doc["estimates"] = nlohmann::json::object();
    for (const auto& [method, e] : a.estimates) {
      for (Target t : kAllTargets) doc["estimates"][to_string(method)][to_string(t)] = component(e, t);
    }
    doc["intervals"] = nlohmann::json::object();
    for (const auto& [method, by_target] : a.intervals) {
      for (const auto& [t, iv] : by_target) {
        doc["intervals"][to_string(method)][to_string(t)] = {
            {"lower", iv.lower}, {"upper", iv.upper}, {"level", iv.level}};
      }
    }
    if (a.acceptance_rate) doc["mcmc_acceptance_rate"] = *a.acceptance_rate;
    out << doc.dump(2) << '\n';
    return;
  }
  if (format == Format::kCsv) {
    out << "kind,method,target,value,lower,upper\n";
    for (const auto& [method, e] : a.estimates) {
      for (Target t : kAllTargets) {
        out << fmt::format("point,{},{},{:.10g},,\n", to_string(method), to_string(t), component(e, t));
      }
    }
    for (const auto& [method, by_target] : a.intervals) {
      for (const auto& [t, iv] : by_target) {
        out << fmt::format("interval,{},{},,{:.10g},{:.10g}\n", to_string(method), to_string(t),
                           iv.lower, iv.upper);
      }
    }
    return;
  }
  if (!a.estimates.empty()) {
    out << "Point estimates\n";
    out << fmt::format("{:<8}{:>12}{:>12}{:>12}{:>12}\n", "method", "kappa", "tau", "cv_p", "cv_k");
    for (const auto& [method, e] : a.estimates) {
      out << fmt::format("{:<8}{:>12.6f}{:>12.6f}{:>12.6f}{:>12.6f}\n", to_string(method), e.kappa,
                         e.tau, e.cv_p, e.cv_k);
    }
  }
  if (!a.intervals.empty()) {
    if (!a.estimates.empty()) out << '\n';
    const double level = a.intervals.begin()->second.begin()->second.level;
    out << fmt::format("Intervals ({:g}%)\n", 100.0 * level);
    out << fmt::format("{:<8}{:<8}{:>12}{:>12}{:>12}\n", "method", "target", "lower", "upper", "width");
    for (const auto& [method, by_target] : a.intervals) {
      for (const auto& [t, iv] : by_target) {
        out << fmt::format("{:<8}{:<8}{:>12.6f}{:>12.6f}{:>12.6f}\n", to_string(method), to_string(t),
                           iv.lower, iv.upper, iv.width());
      }
    }
  }
  if (a.acceptance_rate) {
    out << fmt::format("\nMCMC acceptance rate {:.1f}% (proposal variance {:g})\n",
                       100.0 * *a.acceptance_rate, a.tuned_sigma.value_or(0.0));
  }
}

int cmd_fit(const FitArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const CensoredSample sample = args.bundled ? real_dataset() : load_sample(args.input);
    const Analysis analysis = analyze(sample, args.settings);
    with_output(args.output, out, [&](std::ostream& dest) { print_analysis(analysis, args.format, dest); });
    return static_cast<int>(kExitOk);
  });
}

int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    args.params.validate();
    args.scheme.validate();
    if (args.n < 1) throw DomainError("n must be positive");
    Rng rng = make_stream(args.seed, kTagSimulate, 0);
    for (int draw = 0; draw < kMaxSimulateDraws; ++draw) {
      const CensoredSample sample = generate_sample(args.params, args.scheme, args.n, rng, args.rounding);
      if (!sample.has_failures()) continue;
      with_output(args.output, out, [&](std::ostream& dest) { dest << sample_to_json(sample) << '\n'; });
      return static_cast<int>(kExitOk);
    }
    throw NumericalError("no sample with at least one failure in " + std::to_string(kMaxSimulateDraws) +
                         " draws");
  });
}

int cmd_study(const StudyArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    StudyGrid grid = parse_study_config(read_file(args.config));
    if (args.threads) grid.base.threads = *args.threads;
    std::vector<StudyReport> reports;
    for (const auto& scheme : grid.schemes) {
      for (int n : grid.sizes) {
        StudyGrid cell = grid;
        cell.schemes = {scheme};
        cell.sizes = {n};
        const auto start = std::chrono::steady_clock::now();
        StudyReport report = run_grid(cell).front();
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        out << fmt::format("scheme {} n={} m={}: {} of {} replications, {} rejected samples, {:.1f}s\n",
                           report.scheme_label, report.n, report.m, report.replications_used,
                           report.replications_requested, report.rejected_samples, seconds);
        for (const auto& [method, by_target] : report.mse) {
          out << fmt::format("  MSE  {:<7}", to_string(method));
          for (const auto& [t, v] : by_target) out << fmt::format(" {}={:.5g}", to_string(t), v);
          out << '\n';
        }
        for (const auto& [method, by_target] : report.intervals) {
          out << fmt::format("  CP/AW {:<6}", to_string(method));
          for (const auto& [t, v] : by_target) {
            out << fmt::format(" {}={:.3f}/{:.4g}", to_string(t), v.coverage, v.avg_width);
          }
          out << '\n';
        }
        for (const auto& [who, flagged] : report.unreliable) {
          if (flagged) out << "  unreliable: " << who << " failed on more than 20% of attempts\n";
        }
        reports.push_back(std::move(report));
      }
    }
    std::filesystem::create_directories(args.out_dir);
    const auto csv_path = args.out_dir / "study.csv";
    const auto json_path = args.out_dir / "study.json";
    with_output(csv_path, out, [&](std::ostream& dest) { write_report_csv(reports, dest); });
    with_output(json_path, out, [&](std::ostream& dest) { write_report_json(reports, dest); });
    out << "wrote " << csv_path.string() << " and " << json_path.string() << '\n';
    return static_cast<int>(kExitOk);
  });
}

int cmd_demo(const DemoArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    AnalysisSettings settings;
    settings.methods = {Method::kMle, Method::kLlse, Method::kNllse, Method::kBayes};
    settings.intervals = {IntervalMethod::kMaci, IntervalMethod::kPbiL, IntervalMethod::kPbiNl,
                          IntervalMethod::kHpdi};
    settings.B = args.B;
    settings.seed = args.seed;
    const Analysis analysis = analyze(real_dataset(), settings);
    with_output(args.output, out, [&](std::ostream& dest) {
      if (args.format == Format::kTable) {
        dest << "Plasma cell myeloma data: n = 112, inspections at 5.5 ... 60.5 months\n\n";
      }
      print_analysis(analysis, args.format, dest);
    });
    return static_cast<int>(kExitOk);
  });
}

namespace {

const std::map<std::string, Format> kFormats{
    {"table", Format::kTable}, {"csv", Format::kCsv}, {"json", Format::kJson}};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weibull coefficient-of-variation estimation for progressively interval-censored data",
               "weibcv"};
  app.require_subcommand(1);

  FitArgs fit;
  std::string input;
  std::vector<std::string> methods{"mle"};
  std::vector<std::string> intervals;
  std::string fit_format = "table";
  std::string output;
  std::string prior = "jeffreys";
  std::vector<double> hyper;
  std::string solver = "newton";
  auto* fit_cmd = app.add_subcommand("fit", "Estimate parameters and CVs from a sample file");
  fit_cmd->add_option("input", input, "Sample file (.json or .csv)");
  fit_cmd->add_flag("--bundled", fit.bundled, "Use the bundled myeloma dataset");
  fit_cmd->add_option("-m,--method", methods, "mle, llse, nllse, bayes")->delimiter(',');
  fit_cmd->add_option("-i,--interval", intervals, "aci, maci, pbi_l, pbi_nl, hpdi")->delimiter(',');
  fit_cmd->add_option("--level", fit.settings.level, "Confidence level")
      ->check(CLI::Range(0.0, 1.0));
  fit_cmd->add_option("--bootstrap", fit.settings.B, "Bootstrap replicates B")
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--seed", fit.settings.seed, "Base random seed");
  fit_cmd->add_option("--format", fit_format, "table, csv or json")
      ->check(CLI::IsMember({"table", "csv", "json"}));
  fit_cmd->add_option("-o,--output", output, "Write the report to this file");
  fit_cmd->add_option("--prior", prior, "jeffreys or gamma")->check(CLI::IsMember({"jeffreys", "gamma"}));
  fit_cmd->add_option("--hyper", hyper, "Gamma hyper-parameters a1 a2 b1 b2")->expected(4);
  fit_cmd->add_option("--sigma", fit.settings.mcmc.sigma, "Diagonal proposal variance")
      ->check(CLI::PositiveNumber);
  fit_cmd->add_flag("--tune", fit.settings.mcmc.tune, "Tune the proposal to 25-40% acceptance");
  fit_cmd->add_option("--burn-in", fit.settings.mcmc.burn_in, "MCMC burn-in")
      ->check(CLI::NonNegativeNumber);
  fit_cmd->add_option("--thin", fit.settings.mcmc.thin, "MCMC thinning interval")
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--retained", fit.settings.mcmc.retained, "Retained MCMC states")
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--mle-solver", solver, "newton or alternative")
      ->check(CLI::IsMember({"newton", "alternative"}));
  fit_cmd->add_option("--threads", fit.settings.threads, "Worker threads (0 = all cores)");

  SimulateArgs sim;
  std::string scheme_kind;
  int scheme_m = 4;
  std::vector<double> boundaries;
  std::vector<double> proportions;
  std::string rounding = "floor";
  std::string sim_output;
  auto* sim_cmd = app.add_subcommand("simulate", "Generate one censored sample as JSON");
  sim_cmd->add_option("--kappa", sim.params.kappa, "Shape")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--tau", sim.params.tau, "Scale (F = 1 - exp(-tau t^kappa))")
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--scheme", scheme_kind, "Standard scheme I, II or III on t = 1..m")
      ->check(CLI::IsMember({"I", "II", "III"}));
  sim_cmd->add_option("--m", scheme_m, "Inspections for --scheme")->check(CLI::Range(2, 1000));
  sim_cmd->add_option("--boundaries", boundaries, "Inspection times")->delimiter(',');
  sim_cmd->add_option("--proportions", proportions, "Withdrawal proportions")->delimiter(',');
  sim_cmd->add_option("--n", sim.n, "Units on test")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", sim.seed, "Random seed");
  sim_cmd->add_option("--rounding", rounding, "floor or round")->check(CLI::IsMember({"floor", "round"}));
  sim_cmd->add_option("-o,--output", sim_output, "Output file (default stdout)");

  StudyArgs study;
  unsigned study_threads = 0;
  auto* study_cmd = app.add_subcommand("study", "Run a Monte Carlo study from a JSON config");
  study_cmd->add_option("config", study.config, "Study config (JSON)")->required();
  study_cmd->add_option("--out-dir", study.out_dir, "Directory for study.csv and study.json");
  auto* threads_opt = study_cmd->add_option("--threads", study_threads, "Worker threads (0 = all cores)");

  DemoArgs demo;
  std::string demo_format = "table";
  std::string demo_output;
  auto* demo_cmd = app.add_subcommand("demo", "Full analysis of the bundled myeloma dataset");
  demo_cmd->add_option("--seed", demo.seed, "Base random seed");
  demo_cmd->add_option("--bootstrap", demo.B, "Bootstrap replicates B")->check(CLI::PositiveNumber);
  demo_cmd->add_option("--format", demo_format, "table, csv or json")
      ->check(CLI::IsMember({"table", "csv", "json"}));
  demo_cmd->add_option("-o,--output", demo_output, "Write the report to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? static_cast<int>(kExitOk) : static_cast<int>(kExitUsage);
  }

  auto usage = [&](const std::string& message) {
    err << "usage error: " << message << '\n';
    return static_cast<int>(kExitUsage);
  };

  if (fit_cmd->parsed()) {
    if (fit.bundled == !input.empty()) return usage("fit needs exactly one of INPUT or --bundled");
    fit.input = input;
    fit.format = kFormats.at(fit_format);
    if (!output.empty()) fit.output = output;
    fit.settings.alternative_mle = solver == "alternative";
    try {
      fit.settings.methods.clear();
      for (const auto& m : methods) fit.settings.methods.push_back(parse_method(m));
      for (const auto& i : intervals) fit.settings.intervals.push_back(parse_interval_method(i));
    } catch (const DomainError& e) {
      return usage(e.what());
    }
    if (prior == "gamma") {
      if (hyper.size() != 4) return usage("--prior gamma needs --hyper a1 a2 b1 b2");
      fit.settings.mcmc.prior = Prior::gamma(hyper[0], hyper[1], hyper[2], hyper[3]);
    } else if (!hyper.empty()) {
      return usage("--hyper requires --prior gamma");
    }
    try {
      validate(fit.settings);
    } catch (const DomainError& e) {
      return usage(e.what());
    }
    return cmd_fit(fit, out, err);
  }
  if (sim_cmd->parsed()) {
    if (!scheme_kind.empty() && (!boundaries.empty() || !proportions.empty())) {
      return usage("use either --scheme or --boundaries/--proportions");
    }
    if (!scheme_kind.empty()) {
      sim.scheme = standard_scheme(parse_scheme_kind(scheme_kind), scheme_m);
    } else if (!boundaries.empty() || !proportions.empty()) {
      sim.scheme = {boundaries, proportions};
    }
    try {
      sim.scheme.validate();
    } catch (const std::exception& e) {
      return usage(std::string("invalid scheme: ") + e.what());
    }
    sim.rounding = rounding == "round" ? WithdrawalRounding::kRound : WithdrawalRounding::kFloor;
    if (!sim_output.empty()) sim.output = sim_output;
    return cmd_simulate(sim, out, err);
  }
  if (study_cmd->parsed()) {
    if (threads_opt->count() > 0) study.threads = study_threads;
    return cmd_study(study, out, err);
  }
  demo.format = kFormats.at(demo_format);
  if (!demo_output.empty()) demo.output = demo_output;
  return cmd_demo(demo, out, err);
}

}  // namespace weibcv::cli
