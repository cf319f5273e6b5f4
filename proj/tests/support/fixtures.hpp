#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "weibcv/censoring.hpp"
#include "weibcv/distribution.hpp"

namespace weibcv::testing {

inline CensoredSample real_sample() {
  return CensoredSample({5.5, 10.5, 15.5, 20.5, 25.5, 30.5, 40.5, 50.5, 60.5},
                        {18, 16, 18, 10, 11, 8, 13, 4, 1}, {1, 1, 3, 0, 0, 1, 2, 3, 2}, 112);
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300});
}

// Random increasing boundaries and proportions ending in 1.
inline CensoringScheme random_scheme(Rng& rng, int min_m = 2, int max_m = 8) {
  const int m = uniform_int(rng, min_m, max_m);
  CensoringScheme scheme;
  double t = 0.0;
  for (int i = 0; i < m; ++i) {
    t += uniform(rng, 0.2, 3.0);
    scheme.boundaries.push_back(t);
    scheme.proportions.push_back(uniform(rng, 0.0, 1.0) < 0.5 ? 0.0 : uniform(rng, 0.0, 0.6));
  }
  scheme.proportions.back() = 1.0;
  return scheme;
}

// Parameters whose failure probability by the last boundary lies in a
// moderate range, so samples carry information in several intervals.
inline WeibullParams random_params(Rng& rng, const CensoringScheme& scheme) {
  const double kappa = uniform(rng, 0.6, 3.0);
  const double target = uniform(rng, 0.4, 0.95);
  const double tau = -std::log1p(-target) / std::pow(scheme.boundaries.back(), kappa);
  return {kappa, tau};
}

struct RandomCase {
  WeibullParams truth;
  CensoringScheme scheme;
  CensoredSample sample;
};

// Draws until the sample has failures and does not terminate early.
inline RandomCase random_case(Rng& rng, int min_n = 30, int max_n = 400, int min_m = 2,
                              int max_m = 8) {
  for (;;) {
    const CensoringScheme scheme = random_scheme(rng, min_m, max_m);
    const WeibullParams truth = random_params(rng, scheme);
    const int n = uniform_int(rng, min_n, max_n);
    CensoredSample sample = generate_sample(truth, scheme, n, rng);
    if (sample.has_failures() && !terminated_early(sample)) return {truth, scheme, std::move(sample)};
  }
}

}  // namespace weibcv::testing
