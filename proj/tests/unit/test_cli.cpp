#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"
#include "weibcv/cli.hpp"
#include "weibcv/sample_io.hpp"

using namespace weibcv;
using namespace weibcv::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "weibcv");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "weibcv_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("bundled dataset matches the fixture") { CHECK(cli::real_dataset() == real_sample()); }

  TEST_CASE("fit on the bundled data") {
    const Outcome r = invoke({"fit", "--bundled", "-m", "mle,llse", "-i", "maci", "--format", "json"});
    REQUIRE(r.code == cli::kExitOk);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(std::abs(doc["estimates"]["mle"]["kappa"].get<double>() - 1.2297) < 1e-3);
    CHECK(std::abs(doc["estimates"]["mle"]["cv_p"].get<double>() - 0.8176) < 1e-3);
    CHECK(std::abs(doc["estimates"]["llse"]["kappa"].get<double>() - 1.2164) < 1e-3);
    CHECK(std::abs(doc["intervals"]["maci"]["cv_p"]["lower"].get<double>() - 0.6926) < 1e-3);
    CHECK(std::abs(doc["intervals"]["maci"]["cv_p"]["upper"].get<double>() - 0.9652) < 1e-3);
  }

  TEST_CASE("fit reads files and writes reports") {
    const fs::path in = scratch("real.json");
    write_sample_json(real_sample(), in);
    const fs::path report = scratch("report.csv");
    const Outcome r = invoke({"fit", in.string(), "--format", "csv", "-o", report.string()});
    REQUIRE(r.code == cli::kExitOk);
    std::ifstream f(report);
    std::string header;
    std::getline(f, header);
    CHECK(header == "kind,method,target,value,lower,upper");
  }

  TEST_CASE("error exit codes") {
    const fs::path empty = scratch("empty.json");
    std::ofstream(empty).close();
    const Outcome e = invoke({"fit", empty.string()});
    CHECK(e.code == cli::kExitData);
    CHECK_FALSE(e.err.empty());

    const fs::path bad = scratch("bad.csv");
    std::ofstream(bad) << "t,X,W\n1,2,0\n2,x,1\n";
    const Outcome b = invoke({"fit", bad.string()});
    CHECK(b.code == cli::kExitData);
    CHECK(b.err.find("line 3") != std::string::npos);

    CHECK(invoke({"fit", "--bundled", "--level", "1.5"}).code == cli::kExitUsage);
    CHECK(invoke({"fit", "--bundled", "-m", "ols"}).code == cli::kExitUsage);
    CHECK(invoke({"fit", "--bundled", "--no-such-flag"}).code == cli::kExitUsage);
    CHECK(invoke({"fit"}).code == cli::kExitUsage);
    CHECK(invoke({"simulate", "--boundaries", "1,2", "--proportions", "0.5,0.5"}).code == cli::kExitUsage);
    CHECK(invoke({"study", scratch("missing.json").string()}).code != cli::kExitOk);
  }

  TEST_CASE("simulate is deterministic and accepts custom schemes") {
    const Outcome a = invoke({"simulate", "--scheme", "II", "--m", "4", "--n", "100", "--seed", "5"});
    const Outcome b = invoke({"simulate", "--scheme", "II", "--m", "4", "--n", "100", "--seed", "5"});
    REQUIRE(a.code == cli::kExitOk);
    CHECK(a.out == b.out);
    const CensoredSample s = parse_sample_json(a.out);
    CHECK(s.n() == 100);
    CHECK(s.intervals() == 4);
    const Outcome c =
        invoke({"simulate", "--boundaries", "1,2,3,4", "--proportions", "0.5,0,0,1", "--n", "50", "--seed", "1"});
    CHECK(c.code == cli::kExitOk);
    CHECK(invoke({"simulate", "--n", "100", "--seed", "6"}).out != a.out);
  }

  TEST_CASE("simulated samples round trip through fit") {
    Rng rng(71);
    for (int i = 0; i < 25; ++i) {
      const CensoringScheme scheme = random_scheme(rng, 2, 6);
      const WeibullParams p = random_params(rng, scheme);
      std::string b, q;
      for (std::size_t j = 0; j < scheme.boundaries.size(); ++j) {
        b += (j ? "," : "") + std::to_string(scheme.boundaries[j]);
        q += (j ? "," : "") + std::to_string(scheme.proportions[j]);
      }
      const fs::path file = scratch("sim.json");
      const Outcome sim = invoke({"simulate", "--kappa", std::to_string(p.kappa), "--tau", std::to_string(p.tau),
                                  "--boundaries", b, "--proportions", q, "--n", "150", "--seed",
                                  std::to_string(i), "-o", file.string()});
      REQUIRE(sim.code == cli::kExitOk);
      CHECK_NOTHROW(load_sample(file));
      const Outcome fit = invoke({"fit", file.string(), "-m", "mle,llse", "--format", "json"});
      CHECK(fit.code != cli::kExitUsage);
      CHECK(fit.code != cli::kExitData);
    }
  }

  TEST_CASE("study writes reports on the config axes") {
    const fs::path config = scratch("study.json");
    std::ofstream(config) << R"({"schemes": [{"kind": "I", "m": 4}, {"kind": "III", "m": 4}],
      "n": [30, 60], "L": 4, "methods": ["mle", "llse"], "intervals": ["maci"], "seed": 2})";
    const fs::path out_dir = scratch("study_out");
    fs::remove_all(out_dir);
    const Outcome r = invoke({"study", config.string(), "--out-dir", out_dir.string(), "--threads", "1"});
    REQUIRE(r.code == cli::kExitOk);
    REQUIRE(fs::exists(out_dir / "study.csv"));
    std::ifstream f(out_dir / "study.json");
    const auto doc = nlohmann::json::parse(f);
    REQUIRE(doc.size() == 4);
    std::set<std::string> schemes;
    std::set<int> sizes;
    for (const auto& cell : doc) {
      schemes.insert(cell["scheme"].get<std::string>());
      sizes.insert(cell["n"].get<int>());
      CHECK(cell.contains("rejected_samples"));
    }
    CHECK(schemes == std::set<std::string>{"I", "III"});
    CHECK(sizes == std::set<int>{30, 60});
  }

  TEST_CASE("demo reports every method") {
    const Outcome r = invoke({"demo", "--seed", "3", "--bootstrap", "200", "--format", "json"});
    REQUIRE(r.code == cli::kExitOk);
    const auto doc = nlohmann::json::parse(r.out);
    for (const char* m : {"mle", "llse", "nllse", "bayes"}) CHECK(doc["estimates"].contains(m));
    for (const char* m : {"maci", "pbi_l", "pbi_nl", "hpdi"}) CHECK(doc["intervals"].contains(m));
    CHECK(doc.contains("mcmc_acceptance_rate"));
  }
}
