#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "weibcv/bayes.hpp"
#include "weibcv/errors.hpp"

using namespace weibcv;
using namespace weibcv::testing;

namespace {

McmcChain chain_of(const std::vector<ChainState>& states) {
  McmcChain c;
  c.states = states;
  return c;
}

}  // namespace

TEST_SUITE("bayes") {
  TEST_CASE("log posterior limits") {
    const CensoredSample s = real_sample();
    const WeibullParams p{1.3, 0.02};
    CHECK(log_posterior(p, s, Prior::gamma(1, 0, 1, 0)) == log_likelihood(p, s));
    CHECK(log_posterior({1, 1}, s, Prior::jeffreys_prior()) == log_likelihood({1, 1}, s));
    CHECK(log_posterior({-1, 1}, s, Prior::jeffreys_prior()) == -INFINITY);
    CHECK_THROWS_AS(Prior::gamma(-1, 1, 1, 1).validate(), DomainError);
  }

  TEST_CASE("posterior ratio matches a direct density ratio") {
    const CensoredSample s({1.0, 2.0, 3.0}, {4, 3, 2}, {1, 0, 5});
    const Prior prior = Prior::gamma(3, 4, 0.5, 10);
    auto density = [&](const WeibullParams& p) {
      double like = 1.0, prev = 0.0;
      for (std::size_t i = 0; i < s.intervals(); ++i) {
        const double cur = std::pow(s.upper(i), p.kappa);
        like *= std::pow(std::exp(p.tau * (cur - prev)) - 1.0, s.failures()[i]) *
                std::exp(-p.tau * (s.failures()[i] + s.withdrawals()[i]) * cur);
        prev = cur;
      }
      return like * std::pow(p.kappa, 2.0) * std::exp(-4.0 * p.kappa) * std::pow(p.tau, -0.5) *
             std::exp(-10.0 * p.tau);
    };
    const WeibullParams a{0.8, 0.05}, b{1.1, 0.09};
    const double ratio = std::exp(log_posterior(a, s, prior) - log_posterior(b, s, prior));
    CHECK(rel_close(ratio, density(a) / density(b), 1e-12));
  }

  TEST_CASE("prior means reproduce the simulation settings") {
    CHECK(3.0 / 4.0 == 0.75);
    CHECK(5.0 / 4.0 == 1.25);
    CHECK(std::abs(0.5 / 10.0 - 0.05) < 1e-15);
    CHECK(1.0 / 2.0 == 0.5);
  }

  TEST_CASE("proposal covariance must be positive definite") {
    CHECK_THROWS_AS(proposal_factor({1.0, 2.0, 2.0, 1.0}), DomainError);
    CHECK_THROWS_AS(proposal_factor({1.0, 0.1, 0.2, 1.0}), DomainError);
    CHECK_THROWS_AS(proposal_factor({0.0, 0.0, 0.0, 1.0}), DomainError);
    const Matrix2 l = proposal_factor({4.0, 2.0, 2.0, 5.0});
    CHECK(l.kk == 2.0);
    CHECK(l.tk == 1.0);
    CHECK(l.tt == 2.0);
    Rng rng(51);
    RwmhOptions options;
    options.sigma = {1.0, 2.0, 2.0, 1.0};
    CHECK_THROWS_AS(rwmh(real_sample(), Prior::jeffreys_prior(), options, rng), DomainError);
  }

  TEST_CASE("degenerate proposal accepts almost everything") {
    Rng rng(52);
    RwmhOptions options;
    options.iterations = 2000;
    options.burn_in = 0;
    options.sigma = {1e-20, 0.0, 0.0, 1e-20};
    options.init = WeibullParams{1.2, 0.02};
    const McmcChain chain = rwmh(real_sample(), Prior::jeffreys_prior(), options, rng);
    CHECK(chain.acceptance_rate > 0.99);
    for (const ChainState& s : chain.states) {
      CHECK(std::abs(s.kappa - 1.2) < 1e-6);
      CHECK(std::abs(s.tau - 0.02) < 1e-6);
    }
  }

  TEST_CASE("retained state bookkeeping") {
    Rng rng(53);
    for (const auto& [m, mb, thin] : {std::tuple{1000L, 100L, 1L}, std::tuple{1000L, 100L, 7L},
                                       std::tuple{1001L, 0L, 10L}, std::tuple{50L, 49L, 3L}}) {
      RwmhOptions options;
      options.iterations = m;
      options.burn_in = mb;
      options.thin = thin;
      const McmcChain chain = rwmh(real_sample(), Prior::jeffreys_prior(), options, rng);
      CHECK(static_cast<long>(chain.states.size()) == (m - mb) / thin);
      for (std::size_t i = 0; i < chain.states.size(); ++i) {
        CHECK(chain.states[i].iteration == mb + static_cast<long>(i + 1) * thin);
      }
      CHECK(chain.acceptance_rate >= 0.0);
      CHECK(chain.acceptance_rate <= 1.0);
    }
    RwmhOptions bad;
    bad.iterations = 10;
    bad.burn_in = 10;
    CHECK_THROWS_AS(rwmh(real_sample(), Prior::jeffreys_prior(), bad, rng), DomainError);
  }

  TEST_CASE("chain states stay admissible near the boundary") {
    Rng rng(54);
    RwmhOptions options;
    options.iterations = 20000;
    options.burn_in = 0;
    options.sigma = {0.5, 0.0, 0.0, 0.05};
    options.init = WeibullParams{0.1, 0.001};
    const McmcChain chain = rwmh(CensoredSample({1, 2}, {1, 1}, {0, 3}), Prior::jeffreys_prior(), options, rng);
    for (const ChainState& s : chain.states) {
      CHECK(s.kappa > 0.0);
      CHECK(s.tau > 0.0);
    }
  }

  TEST_CASE("random walk preserves a two-cell target") {
    // Density 1 on [0,1)x[0,1) and 3 on [1,2)x[0,1): stationary mass 1/4 and 3/4.
    auto log_density = [](const Vector2& s) -> double {
      if (s[1] < 0.0 || s[1] >= 1.0 || s[0] < 0.0 || s[0] >= 2.0) return -INFINITY;
      return s[0] < 1.0 ? 0.0 : std::log(3.0);
    };
    Rng rng(55);
    long in_right = 0;
    const long steps = 1'000'000;
    random_walk(log_density, Vector2{0.5, 0.5}, Matrix2{0.5, 0.0, 0.0, 0.5}, steps, rng,
                [&](long, const Vector2& s, bool) { in_right += s[0] >= 1.0 ? 1 : 0; });
    CHECK(std::abs(static_cast<double>(in_right) / steps - 0.75) < 0.02);
  }

  TEST_CASE("posterior means") {
    CHECK_THROWS_AS(bayes_estimate(McmcChain{}), DomainError);
    const EstimateSet constant = bayes_estimate(chain_of({{1, 2.0, 0.5, 0.1, 0.2}, {2, 2.0, 0.5, 0.1, 0.2}}));
    CHECK(constant.kappa == 2.0);
    CHECK(constant.tau == 0.5);
    const EstimateSet two = bayes_estimate(chain_of({{1, 1, 1, 1, 1}, {2, 3, 3, 3, 3}}));
    CHECK(two.kappa == 2.0);
    CHECK(two.tau == 2.0);

    Rng rng(56);
    RwmhOptions options;
    options.iterations = 20000;
    options.burn_in = 1000;
    const McmcChain chain = rwmh(real_sample(), Prior::jeffreys_prior(), options, rng);
    const EstimateSet e = bayes_estimate(chain);
    double mean = 0.0;
    long count = 0;
    for (const ChainState& s : chain.states) {
      ++count;
      mean += (s.kappa - mean) / count;  // streaming update
    }
    CHECK(std::abs(e.kappa - mean) < 1e-12);
    const std::vector<double> cvp = chain.values(Target::kCvP);
    double two_pass = 0.0;
    for (double v : cvp) two_pass += v;
    CHECK(std::abs(e.cv_p - two_pass / cvp.size()) < 1e-12);
  }

  TEST_CASE("HPDI on evenly spaced values") {
    std::vector<double> v(100);
    for (int i = 0; i < 100; ++i) v[i] = i + 1;
    const IntervalEstimate iv = hpdi(v, 0.95);
    CHECK(iv.lower == 1.0);
    CHECK(iv.upper == 96.0);
    CHECK_THROWS_AS(hpdi(std::vector<double>(10, 1.0), 0.95), DomainError);
    CHECK_THROWS_AS(hpdi(v, 1.0), DomainError);
  }

  TEST_CASE("HPDI is the minimal-width window") {
    Rng rng(57);
    for (int i = 0; i < 1000; ++i) {
      std::vector<double> v(1000);
      const int shape = i % 3;
      for (double& x : v) {
        if (shape == 0) x = std::normal_distribution<double>(0.0, 1.0)(rng);
        else if (shape == 1) x = std::gamma_distribution<double>(2.0, 1.0)(rng);
        else x = uniform(rng, 0.0, 1.0);
      }
      std::sort(v.begin(), v.end());
      const double level = 0.95;
      const IntervalEstimate iv = hpdi(v, level);
      const std::size_t need = static_cast<std::size_t>(std::floor(v.size() * level)) + 1;
      double best = INFINITY;
      for (std::size_t a = 0; a < v.size(); ++a) {
        for (std::size_t b = a + need - 1; b < v.size(); ++b) best = std::min(best, v[b] - v[a]);
      }
      CHECK(iv.width() == best);
      const auto inside = std::count_if(v.begin(), v.end(), [&](double x) { return iv.contains(x); });
      CHECK(static_cast<std::size_t>(inside) >= need);
    }
  }

  TEST_CASE("HPDI is no wider than the central interval for unimodal draws") {
    Rng rng(58);
    for (int i = 0; i < 100; ++i) {
      std::vector<double> v(2000);
      for (double& x : v) x = std::gamma_distribution<double>(3.0, 1.0)(rng);
      std::sort(v.begin(), v.end());
      const IntervalEstimate h = hpdi(v, 0.95);
      CHECK(h.width() <= v[1949] - v[50]);
    }
  }

  TEST_CASE("posterior mean equals the mean of the HPDI input") {
    Rng rng(59);
    RwmhOptions options;
    options.iterations = 5000;
    options.burn_in = 500;
    options.thin = 3;
    const McmcChain chain = rwmh(real_sample(), Prior::jeffreys_prior(), options, rng);
    const EstimateSet e = bayes_estimate(chain);
    for (Target t : {Target::kKappa, Target::kTau, Target::kCvP, Target::kCvK}) {
      const std::vector<double> v = chain.values(t);
      double sum = 0.0;
      for (double x : v) sum += x;
      const double expected = t == Target::kKappa ? e.kappa
                              : t == Target::kTau ? e.tau
                              : t == Target::kCvP ? e.cv_p
                                                  : e.cv_k;
      CHECK(std::abs(sum / v.size() - expected) < 1e-12);
    }
  }

  TEST_CASE("proposal tuning") {
    const CensoredSample s = real_sample();
    const Prior prior = Prior::jeffreys_prior();
    Rng rng(60);
    const TuneResult from_wide = tune_sigma(s, prior, {1e-2, 0.0, 0.0, 1e-2}, 2000, rng);
    CHECK(from_wide.acceptance_rate >= 0.25);
    CHECK(from_wide.acceptance_rate <= 0.40);
    CHECK(from_wide.sigma.kk < 1e-2);

    const TuneResult again = tune_sigma(s, prior, from_wide.sigma, 2000, rng);
    if (again.rounds == 1) CHECK(again.sigma.kk == from_wide.sigma.kk);

    const TuneResult from_huge = tune_sigma(s, prior, {1e3, 0.0, 0.0, 1e3}, 2000, rng);
    CHECK(from_huge.sigma.kk < 1e3);
    CHECK(from_huge.rounds > 1);
    CHECK(from_huge.acceptance_rate >= 0.25);

    CHECK_THROWS_AS(tune_sigma(s, prior, {1e-2, 0.0, 0.0, 1e-2}, 999, rng), DomainError);
  }

  TEST_CASE("chain export") {
    Rng rng(61);
    RwmhOptions options;
    options.iterations = 300;
    options.burn_in = 100;
    options.thin = 10;
    const McmcChain chain = rwmh(real_sample(), Prior::jeffreys_prior(), options, rng);
    std::ostringstream out;
    write_chain_csv(chain, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "iter,kappa,tau,cv_p,cv_k");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 20);
  }
}
