#include "oiel/numerics.hpp"

#include <algorithm>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "oiel/errors.hpp"

namespace oiel::num {

double log_choose(double big_n, double n) {
  if (big_n < n) return -kInf;
  return std::lgamma(big_n + 1.0) - std::lgamma(n + 1.0) -
         std::lgamma(big_n - n + 1.0);
}

double digamma(double x) { return boost::math::digamma(x); }

double trigamma(double x) { return boost::math::trigamma(x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / M_SQRT2); }

double normal_quantile(double p) {
  if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::domain, "normal_quantile: p outside [0,1]");
  if (p == 0.0) return -kInf;
  if (p == 1.0) return kInf;
  // erfc_inv keeps full relative precision in both tails.
  return -M_SQRT2 * boost::math::erfc_inv(2.0 * p);
}

double chisq1_cdf(double q) {
  if (q <= 0.0) return 0.0;
  return std::erf(std::sqrt(0.5 * q));
}

double chisq1_quantile(double p) {
  if (!(p >= 0.0 && p < 1.0)) {
    if (p == 1.0) return kInf;
    fail(ErrorCode::domain, "chisq1_quantile: p outside [0,1]");
  }
  if (p == 0.0) return 0.0;
  const double z = M_SQRT2 * boost::math::erf_inv(p);
  return z * z;
}

double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double f_lo, double f_hi, double ftol, double xtol,
                 int max_iter) {
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo > 0.0) == (f_hi > 0.0))
    fail(ErrorCode::invalid_argument, "find_root: root is not bracketed");
  int side = 0;
  double x = lo;
  for (int it = 0; it < max_iter; ++it) {
    x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
    // fall back to bisection when the secant lands on (or outside) the ends
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    const double fx = f(x);
    if (std::abs(fx) <= ftol || hi - lo <= xtol) return x;
    if ((fx > 0.0) == (f_hi > 0.0)) {
      hi = x;
      f_hi = fx;
      if (side == -1) f_lo *= 0.5;
      side = -1;
    } else {
      lo = x;
      f_lo = fx;
      if (side == 1) f_hi *= 0.5;
      side = 1;
    }
  }
  return x;
}

}  // namespace oiel::num
