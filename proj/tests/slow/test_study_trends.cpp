#include "doctest.h"
#include "weibcv/montecarlo.hpp"

using namespace weibcv;

namespace {

double mle_cvp_mse(const WeibullParams& truth, SchemeKind kind, int m, int n, int L, std::uint64_t seed) {
  StudyConfig c;
  c.params_truth = truth;
  c.scheme = standard_scheme(kind, m);
  c.n = n;
  c.L = L;
  c.methods = {Method::kMle};
  c.intervals = {IntervalMethod::kMaci};
  c.seed = seed;
  const StudyReport r = run_study(c);
  REQUIRE(r.complete());
  return r.mse.at(Method::kMle).at(Target::kCvP);
}

}  // namespace

TEST_SUITE("study_trends") {
  TEST_CASE("scheme I beats scheme III on MLE CV_p error in most cells") {
    const WeibullParams truth{1.25, 0.525};
    int wins = 0;
    for (int n : {50, 200}) {
      for (int m : {4, 8}) {
        const double one = mle_cvp_mse(truth, SchemeKind::kI, m, n, 500, 11);
        const double three = mle_cvp_mse(truth, SchemeKind::kIII, m, n, 500, 11);
        MESSAGE("n=" << n << " m=" << m << " I " << one << " III " << three);
        wins += one < three ? 1 : 0;
      }
    }
    CHECK(wins >= 3);
  }

  TEST_CASE("MLE CV_p error near the tabulated value") {
    const double value = mle_cvp_mse({0.75, 0.052}, SchemeKind::kI, 4, 200, 300, 12);
    MESSAGE("MSE " << value);
    CHECK(value > 0.1953 * 0.5);
    CHECK(value < 0.1953 * 1.5);
  }

  TEST_CASE("MLE CV_p error shrinks with n under scheme I") {
    for (int m : {4, 8}) {
      const double small = mle_cvp_mse({1.25, 0.525}, SchemeKind::kI, m, 50, 300, 13);
      const double large = mle_cvp_mse({1.25, 0.525}, SchemeKind::kI, m, 200, 300, 13);
      CHECK(large < small);
    }
  }
}
