#pragma once

// Special functions and scalar root finding shared by the estimators.

#include <cmath>
#include <functional>
#include <limits>

namespace oiel::num {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// log of the generalized binomial coefficient C(N, n) for real N >= n.
double log_choose(double big_n, double n);

double digamma(double x);
double trigamma(double x);

double normal_cdf(double x);
double normal_quantile(double p);

// Distribution function and quantile of the chi-square law with one degree
// of freedom, both routed through the error function.
double chisq1_cdf(double q);
double chisq1_quantile(double p);

// Returns a root of f inside [lo, hi] given f(lo) and f(hi) of opposite sign.
// Uses the Illinois variant of regula falsi with a bisection safeguard and
// stops once |f| <= ftol or the bracket is narrower than xtol.
double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double f_lo, double f_hi, double ftol, double xtol,
                 int max_iter = 200);

inline double log1mexp(double a) {
  // log(1 - exp(-a)) for a > 0
  return a > M_LN2 ? std::log1p(-std::exp(-a)) : std::log(-std::expm1(-a));
}

}  // namespace oiel::num
