#include <ostream>

#include "json.hpp"
#include "weibcv/errors.hpp"
#include "weibcv/montecarlo.hpp"

namespace weibcv {

namespace {

using json = nlohmann::json;

template <typename T>
T field(const json& doc, const char* name, T fallback) {
  if (!doc.contains(name)) return fallback;
  try {
    return doc.at(name).get<T>();
  } catch (const json::exception& e) {
    throw DataError(std::string("study config: field '") + name + "': " + e.what());
  }
}

std::pair<std::string, CensoringScheme> parse_scheme(const json& node) {
  if (node.is_string()) throw DataError("study config: a scheme name needs \"m\" (use {\"kind\": ..., \"m\": ...})");
  if (!node.is_object()) throw DataError("study config: scheme must be an object");
  std::pair<std::string, CensoringScheme> out;
  if (node.contains("kind")) {
    const std::string kind = field<std::string>(node, "kind", "");
    const int m = field<int>(node, "m", 4);
    out = {kind, standard_scheme(parse_scheme_kind(kind), m)};
  } else {
    out.second.boundaries = field<std::vector<double>>(node, "boundaries", {});
    out.second.proportions = field<std::vector<double>>(node, "proportions", {});
    out.first = "custom";
  }
  out.first = field<std::string>(node, "label", out.first);
  try {
    out.second.validate();
  } catch (const std::exception& e) {
    throw DataError(std::string("study config: invalid scheme: ") + e.what());
  }
  return out;
}

json metrics_json(const StudyReport& r) {
  json cell;
  cell["scheme"] = r.scheme_label;
  cell["n"] = r.n;
  cell["m"] = r.m;
  cell["replications_requested"] = r.replications_requested;
  cell["replications_used"] = r.replications_used;
  cell["rejected_samples"] = r.rejected_samples;
  cell["estimation_attempts"] = r.estimation_attempts;
  cell["complete"] = r.complete();
  json mse = json::object();
  for (const auto& [method, by_target] : r.mse) {
    for (const auto& [t, v] : by_target) mse[to_string(method)][to_string(t)] = v;
  }
  cell["mse"] = mse;
  json intervals = json::object();
  for (const auto& [method, by_target] : r.intervals) {
    for (const auto& [t, v] : by_target) {
      intervals[to_string(method)][to_string(t)] = {{"coverage", v.coverage}, {"avg_width", v.avg_width}};
    }
  }
  cell["intervals"] = intervals;
  json failures = json::object();
  for (const auto& [who, n] : r.estimator_failures) {
    failures[who] = {{"count", n}, {"unreliable", r.unreliable.at(who)}};
  }
  cell["estimator_failures"] = failures;
  return cell;
}

bool unreliable_for(const StudyReport& r, const std::string& who) {
  const auto it = r.unreliable.find(who);
  return it != r.unreliable.end() && it->second;
}

}  // namespace

StudyGrid parse_study_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("study config: ") + e.what());
  }
  if (!doc.is_object()) throw DataError("study config: top level must be an object");

  StudyGrid grid;
  StudyConfig& c = grid.base;
  if (doc.contains("params_truth")) {
    const json& p = doc.at("params_truth");
    c.params_truth = {field<double>(p, "kappa", c.params_truth.kappa),
                      field<double>(p, "tau", c.params_truth.tau)};
  }
  c.L = field<int>(doc, "L", c.L);
  c.B = field<int>(doc, "B", c.B);
  c.M = field<long>(doc, "M", c.M);
  c.M_b = field<long>(doc, "M_b", c.M_b);
  c.level = field<double>(doc, "level", c.level);
  c.seed = field<std::uint64_t>(doc, "seed", c.seed);
  c.proposal_scale = field<double>(doc, "proposal_scale", c.proposal_scale);
  c.pilot_M = field<long>(doc, "pilot_M", c.pilot_M);
  c.threads = field<unsigned>(doc, "threads", c.threads);
  if (doc.contains("prior")) {
    const json& p = doc.at("prior");
    if (field<bool>(p, "jeffreys", false)) {
      c.prior = Prior::jeffreys_prior();
    } else {
      c.prior = Prior::gamma(field<double>(p, "a1", 0.0), field<double>(p, "a2", 0.0),
                             field<double>(p, "b1", 0.0), field<double>(p, "b2", 0.0));
    }
  }
  try {
    if (doc.contains("methods")) {
      c.methods.clear();
      for (const auto& name : field<std::vector<std::string>>(doc, "methods", {})) {
        c.methods.insert(parse_method(name));
      }
    }
    if (doc.contains("intervals")) {
      c.intervals.clear();
      for (const auto& name : field<std::vector<std::string>>(doc, "intervals", {})) {
        c.intervals.insert(parse_interval_method(name));
      }
    }
  } catch (const DomainError& e) {
    throw DataError(std::string("study config: ") + e.what());
  }

  if (doc.contains("schemes")) {
    if (!doc.at("schemes").is_array()) throw DataError("study config: 'schemes' must be a list");
    for (const json& s : doc.at("schemes")) grid.schemes.push_back(parse_scheme(s));
  } else if (doc.contains("scheme")) {
    grid.schemes.push_back(parse_scheme(doc.at("scheme")));
  } else {
    grid.schemes.emplace_back(c.scheme_label, c.scheme);
  }

  if (doc.contains("n") && doc.at("n").is_array()) {
    grid.sizes = field<std::vector<int>>(doc, "n", {});
  } else {
    grid.sizes.push_back(field<int>(doc, "n", c.n));
  }
  if (grid.sizes.empty()) throw DataError("study config: 'n' is an empty list");

  for (const auto& [label, scheme] : grid.schemes) {
    StudyConfig cell = c;
    cell.scheme = scheme;
    cell.scheme_label = label;
    for (int n : grid.sizes) {
      cell.n = n;
      try {
        cell.validate();
      } catch (const DomainError& e) {
        throw DataError(std::string("study config: ") + e.what());
      }
    }
  }
  return grid;
}

void write_report_csv(const std::vector<StudyReport>& reports, std::ostream& out) {
  out << "scheme,n,m,kind,method,target,mse,coverage,avg_width,replications,rejected_samples,"
         "unreliable\n";
  out.precision(10);
  for (const StudyReport& r : reports) {
    const auto prefix = [&](const char* kind, const char* method, Target t) {
      out << r.scheme_label << ',' << r.n << ',' << r.m << ',' << kind << ',' << method << ','
          << to_string(t) << ',';
    };
    const auto suffix = [&](const std::string& who) {
      out << ',' << r.replications_used << ',' << r.rejected_samples << ','
          << (unreliable_for(r, who) ? "true" : "false") << '\n';
    };
    for (const auto& [method, by_target] : r.mse) {
      for (const auto& [t, v] : by_target) {
        prefix("point", to_string(method), t);
        out << v << ",,";
        suffix(to_string(method));
      }
    }
    for (const auto& [method, by_target] : r.intervals) {
      const std::string owner = method == IntervalMethod::kAci || method == IntervalMethod::kMaci
                                    ? "mle"
                                : method == IntervalMethod::kHpdi ? "bayes"
                                                                  : to_string(method);
      for (const auto& [t, v] : by_target) {
        prefix("interval", to_string(method), t);
        out << ',' << v.coverage << ',' << v.avg_width;
        suffix(owner);
      }
    }
  }
}

void write_report_json(const std::vector<StudyReport>& reports, std::ostream& out) {
  json doc = json::array();
  for (const StudyReport& r : reports) doc.push_back(metrics_json(r));
  out << doc.dump(2) << '\n';
}

}  // namespace weibcv
