#include "oiel/el_core.hpp"

#include <algorithm>
#include <cmath>

#include "oiel/errors.hpp"
#include "oiel/numerics.hpp"

namespace oiel {

std::string form_name(InflationForm form) {
  switch (form) {
    case InflationForm::ztoi: return "ztoi";
    case InflationForm::oizt: return "oizt";
    case InflationForm::none: return "none";
  }
  return "unknown";
}

InflationForm form_from_name(std::string_view name) {
  if (name == "ztoi") return InflationForm::ztoi;
  if (name == "oizt") return InflationForm::oizt;
  if (name == "none") return InflationForm::none;
  fail(ErrorCode::invalid_argument, "unknown model form `" + std::string(name) + "`");
}

double h_mass(InflationForm form, const Family& family, int y, double eta, double w) {
  switch (form) {
    case InflationForm::ztoi:
      return w * family.pmf(y, eta) + (y == 1 ? 1.0 - w : 0.0);
    case InflationForm::oizt:
      if (y == 0) return family.f0(eta);
      if (y == 1) return (1.0 - w) * (1.0 - family.f0(eta)) + w * family.f1(eta);
      return w * family.pmf(y, eta);
    case InflationForm::none:
      return family.pmf(y, eta);
  }
  return 0.0;
}

double h_mass(InflationForm form, const Family& family, int y,
              const Eigen::VectorXd& x, const Eigen::VectorXd& beta, double w) {
  if (x.size() != beta.size())
    fail(ErrorCode::invalid_argument, "covariate and coefficient dimensions differ");
  return h_mass(form, family, y, x.dot(beta), w);
}

double zero_mass(InflationForm form, const Family& family, double eta, double w) {
  return form == InflationForm::ztoi ? w * family.f0(eta) : family.f0(eta);
}

Eigen::VectorXd zero_masses(const Model& model, const Dataset& data,
                            const Eigen::VectorXd& beta, double w) {
  const Eigen::VectorXd eta = data.x() * beta;
  Eigen::VectorXd c(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    c[i] = zero_mass(model.form, model.family, eta[i], w);
  return c;
}

double solve_xi(std::span<const double> c, double alpha) {
  const std::size_t n = c.size();
  if (n == 0) fail(ErrorCode::invalid_argument, "solve_xi: empty constraint vector");
  double d_min = num::kInf;
  double d_max = -num::kInf;
  double scale = 0.0;
  for (double ci : c) {
    const double d = ci - alpha;
    d_min = std::min(d_min, d);
    d_max = std::max(d_max, d);
    scale = std::max(scale, std::abs(d));
  }
  if (scale <= 1e-15) return 0.0;
  if (!(d_min < 0.0 && d_max > 0.0))
    fail(ErrorCode::infeasible_constraint, "solve_xi: alpha outside the hull of the zero masses");

  auto constraint = [&](double xi, double* deriv) {
    double g = 0.0;
    double dg = 0.0;
    for (double ci : c) {
      const double d = ci - alpha;
      const double t = d / (1.0 + xi * d);
      g += t;
      dg -= t * t;
    }
    if (deriv) *deriv = dg;
    return g;
  };

  // g is strictly decreasing on (lo, hi), +inf at lo and -inf at hi.
  double lo = -1.0 / d_max;
  double hi = -1.0 / d_min;
  const double ftol = 1e-13 * static_cast<double>(n);
  double xi = 0.0;
  for (int it = 0; it < 300; ++it) {
    double dg = 0.0;
    const double g = constraint(xi, &dg);
    if (std::abs(g) <= ftol) return xi;
    if (g > 0.0) lo = xi; else hi = xi;
    double next = xi - g / dg;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == xi || hi - lo <= 1e-15 * std::max(1.0, std::abs(xi))) return next;
    xi = next;
  }
  return xi;
}

double log_el(const Model& model, const Dataset& data, const ElParams& params) {
  const double n = static_cast<double>(data.n());
  const Eigen::VectorXd eta = data.x() * params.beta;
  const double w = model.form == InflationForm::none ? 1.0 : params.w;
  double value = num::log_choose(params.N, n);
  if (params.N > n) {
    if (!(params.alpha > 0.0)) return -num::kInf;
    value += (params.N - n) * std::log(params.alpha);
  }
  for (std::size_t i = 0; i < data.n(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const double h = h_mass(model.form, model.family, data.y()[i], eta[r], w);
    const double p = params.p[r];
    if (!(h > 0.0) || !(p > 0.0)) return -num::kInf;
    value += std::log(h) + std::log(p);
  }
  return value;
}

ProfileResult profile_detail(const Model& model, const Dataset& data, double N,
                             const Eigen::VectorXd& beta, double w, double alpha) {
  const double n = static_cast<double>(data.n());
  if (model.form == InflationForm::none) w = 1.0;
  ProfileResult out{-num::kInf, 0.0, Eigen::VectorXd(), false};
  if (!(N >= n) || !(alpha >= 0.0 && alpha < 1.0)) return out;
  const Eigen::VectorXd eta = data.x() * beta;
  Eigen::VectorXd c(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    c[i] = zero_mass(model.form, model.family, eta[i], w);
  try {
    out.xi = solve_xi(c, alpha);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::infeasible_constraint) throw;
    return out;
  }
  double value = num::log_choose(N, n) - n * std::log(n);
  if (N > n) {
    if (!(alpha > 0.0)) return out;
    value += (N - n) * std::log(alpha);
  }
  out.p.resize(eta.size());
  for (std::size_t i = 0; i < data.n(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const double h = h_mass(model.form, model.family, data.y()[i], eta[r], w);
    const double denom = 1.0 + out.xi * (c[r] - alpha);
    if (!(h > 0.0) || !(denom > 0.0)) return out;
    value += std::log(h) - std::log(denom);
    out.p[r] = 1.0 / (n * denom);
  }
  out.value = value;
  out.feasible = true;
  return out;
}

double profile_log_el(const Model& model, const Dataset& data, double N,
                      const Eigen::VectorXd& beta, double w, double alpha) {
  return profile_detail(model, data, N, beta, w, alpha).value;
}

}  // namespace oiel
