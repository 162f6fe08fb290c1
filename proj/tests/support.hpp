#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "oiel/dataset.hpp"
#include "oiel/sim.hpp"

namespace testing {

inline oiel::Dataset intercept_only(std::vector<int> counts, int trials = 0) {
  const auto n = static_cast<Eigen::Index>(counts.size());
  return oiel::Dataset::from_covariates(Eigen::MatrixXd(n, 0), std::move(counts), trials);
}

inline oiel::Dataset scenario_sample(oiel::Scenario s, int n0, double w0, std::uint64_t seed) {
  oiel::ScenarioConfig c;
  c.scenario = s;
  c.n0 = n0;
  c.w0 = w0;
  std::mt19937_64 rng(seed);
  return oiel::generate(c, rng).data;
}

// Zero-truncated counts with one covariate x ~ U(-1, 1) and
// eta = b0 + b1 x, with a share of ones added on top.
inline oiel::Dataset synthetic(const oiel::Family& family, int n, double b0, double b1,
                               double extra_ones, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(-1.0, 1.0), u(0.0, 1.0);
  std::vector<double> xs;
  std::vector<int> ys;
  while (static_cast<int>(ys.size()) < n) {
    const double x = ux(rng);
    const double eta = b0 + b1 * x;
    int y;
    if (u(rng) < extra_ones) {
      y = 1;
    } else {
      // inverse-cdf draw from the base family
      double r = u(rng), acc = 0.0;
      y = 0;
      for (;; ++y) {
        if (!family.in_support(y)) {
          --y;
          break;
        }
        acc += family.pmf(y, eta);
        if (acc >= r) break;
      }
    }
    if (y > 0) {
      xs.push_back(x);
      ys.push_back(y);
    }
  }
  Eigen::MatrixXd cov(n, 1);
  for (int i = 0; i < n; ++i) cov(i, 0) = xs[static_cast<std::size_t>(i)];
  return oiel::Dataset::from_covariates(cov, std::move(ys), family.trials());
}

// E[g(X)] for X ~ N(mean, var) by Simpson's rule on +-10 sd.
template <class G>
double normal_expectation(G g, double mean, double var, int panels = 4000) {
  const double sd = std::sqrt(var), lo = mean - 10 * sd, hi = mean + 10 * sd;
  const double h = (hi - lo) / panels;
  double s = 0.0;
  for (int k = 0; k <= panels; ++k) {
    const double x = lo + k * h;
    const double wgt = (k == 0 || k == panels) ? 1 : (k % 2 ? 4 : 2);
    const double z = (x - mean) / sd;
    s += wgt * g(x) * std::exp(-0.5 * z * z) / (sd * std::sqrt(2 * M_PI));
  }
  return s * h / 3.0;
}

}  // namespace testing
