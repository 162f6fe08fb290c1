#include "oiel/baselines.hpp"

#include <cmath>

#include "oiel/errors.hpp"
#include "oiel/numerics.hpp"

namespace oiel {

double cond_log_pmf(InflationForm form, const Family& family, int y, double eta, double w) {
  const double f0 = family.f0(eta);
  switch (form) {
    case InflationForm::ztoi:
      return std::log(h_mass(form, family, y, eta, w)) - std::log1p(-w * f0);
    case InflationForm::oizt:
      return std::log(h_mass(form, family, y, eta, w)) - std::log1p(-f0);
    case InflationForm::none:
      break;
  }
  return family.log_pmf(y, eta) - num::log1mexp(-family.log_f0(eta));
}

double cond_loglik(InflationForm form, const Family& family, const Dataset& data,
                   const Eigen::VectorXd& beta, double w) {
  const Eigen::VectorXd eta = data.x() * beta;
  double s = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    s += cond_log_pmf(form, family, data.y()[static_cast<std::size_t>(i)], eta[i], w);
  return s;
}

namespace {

// log(1 - f0) and its first two derivatives in eta
struct TruncTerm {
  double value, d1, d2;
};

TruncTerm trunc_term(const Family& family, double eta) {
  const double f0 = family.f0(eta);
  const double s0 = family.score(0.0, eta);
  const double c0 = family.curvature(0.0, eta);
  const double q = 1.0 - f0;
  return {num::log1mexp(-family.log_f0(eta)), -f0 * s0 / q,
          -f0 * (c0 * q + s0 * s0) / (q * q)};
}

double zt_objective(const Family& family, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& weight, const Eigen::VectorXd& beta) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (weight[i] <= 0.0) continue;
    const double eta = x.row(i).dot(beta);
    s += weight[i] * (family.kernel(y[i], eta) - trunc_term(family, eta).value);
  }
  return std::isfinite(s) ? s : -num::kInf;
}

}  // namespace

Eigen::VectorXd zero_truncated_ml(const Family& family, const Eigen::MatrixXd& x,
                                  const Eigen::VectorXd& y, const Eigen::VectorXd& weight,
                                  const Eigen::VectorXd& beta_init, const MlOptions& ml) {
  const Eigen::Index n = x.rows(), d = x.cols();
  if (y.size() != n || weight.size() != n || beta_init.size() != d)
    fail(ErrorCode::invalid_argument, "zero_truncated_ml: dimension mismatch");
  Eigen::VectorXd beta = beta_init;
  double obj = zt_objective(family, x, y, weight, beta);
  const double obj_init = obj;
  for (int it = 0; it < ml.max_iter; ++it) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(d);
    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (weight[i] <= 0.0) continue;
      const double eta = x.row(i).dot(beta);
      const TruncTerm t = trunc_term(family, eta);
      const auto row = x.row(i);
      grad.noalias() += weight[i] * (family.score(y[i], eta) - t.d1) * row.transpose();
      info.noalias() -=
          weight[i] * (family.curvature(y[i], eta) - t.d2) * row.transpose() * row;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    const Eigen::VectorXd piv = ldlt.vectorD();
    const double top = std::max(1.0, piv.cwiseAbs().maxCoeff());
    if (ldlt.info() != Eigen::Success || piv.minCoeff() <= 1e-12 * top) {
      // away from the optimum the geometric curvature can lose definiteness
      info += 1e-6 * top * Eigen::MatrixXd::Identity(d, d);
      ldlt.compute(info);
      if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 0.0)
        fail(ErrorCode::singular_design, "zero_truncated_ml: design is rank deficient");
    }
    const Eigen::VectorXd step = ldlt.solve(grad);
    const double decrement = grad.dot(step);
    if (decrement <= 1e-20 * (1.0 + std::abs(obj))) break;
    double t = 1.0;
    Eigen::VectorXd candidate = beta + step;
    double obj_new = zt_objective(family, x, y, weight, candidate);
    for (int h = 0; h < 40 && !(obj_new >= obj - 1e-13 * (1.0 + std::abs(obj))); ++h) {
      t *= 0.5;
      candidate = beta + t * step;
      obj_new = zt_objective(family, x, y, weight, candidate);
    }
    if (!(obj_new >= obj - 1e-13 * (1.0 + std::abs(obj)))) break;
    const double rel = std::abs(obj_new - obj) / (1.0 + std::abs(obj));
    beta = candidate;
    obj = obj_new;
    if (beta.cwiseAbs().maxCoeff() > ml.coef_bound)
      fail(ErrorCode::separation, "zero_truncated_ml: coefficients diverge (possible separation)");
    if (rel < ml.rel_tol && decrement < 1e-14 * (1.0 + std::abs(obj))) break;
  }
  if (obj < obj_init) return beta_init;
  return beta;
}

double horvitz_thompson(const Model& model, const Dataset& data, const Eigen::VectorXd& beta,
                        double w) {
  const Eigen::VectorXd c = zero_masses(model, data, beta, w);
  if ((c.array() >= 1.0).any())
    fail(ErrorCode::domain, "horvitz_thompson: zero capture probability");
  return (1.0 / (1.0 - c.array())).sum();
}

ClFit cl_fit(const Family& family, const Dataset& data, InflationForm form,
             const ClConfig& config) {
  if (data.n() == 0) fail(ErrorCode::invalid_argument, "cl_fit: empty dataset");
  const auto n = static_cast<Eigen::Index>(data.n());
  const auto m = static_cast<Eigen::Index>(data.ones());
  const bool pinned = config.pin_w || form == InflationForm::none;
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = data.y()[static_cast<std::size_t>(i)];

  ClFit out;
  out.model = {family, pinned ? InflationForm::none : form};
  out.beta = weighted_ml_step(family, data.x(), y, Eigen::VectorXd::Ones(n),
                              Eigen::VectorXd::Zero(data.dim()), config.ml);
  out.w = 1.0;

  if (pinned) {
    out.beta = zero_truncated_ml(family, data.x(), y, Eigen::VectorXd::Ones(n), out.beta,
                                 config.ml);
    out.converged = true;
  } else {
    double w = 0.9;
    double ll = cond_loglik(form, family, data, out.beta, w);
    Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    for (int it = 1; it <= config.max_iter; ++it) {
      const Eigen::VectorXd eta = data.x() * out.beta;
      if (form == InflationForm::oizt) {
        // latent indicator of the truncated-f component for each one
        for (Eigen::Index i = 0; i < m; ++i) {
          const double q = family.f1(eta[i]) / (1.0 - family.f0(eta[i]));
          v[i] = w * q / (1.0 - w + w * q);
        }
        w = v.sum() / static_cast<double>(n);
        out.beta = zero_truncated_ml(family, data.x(), y, v, out.beta, config.ml);
      } else {
        // ZTOI: zeros drawn before the first nonzero come from f, so they are
        // imputed as geometric phantom rows
        Eigen::MatrixXd xx(2 * n, data.dim());
        Eigen::VectorXd yy(2 * n), wt(2 * n);
        for (Eigen::Index i = 0; i < n; ++i) {
          const double f0 = family.f0(eta[i]);
          if (i < m) {
            const double f1 = family.f1(eta[i]);
            v[i] = w * f1 / (1.0 - w + w * f1);
          }
          u[i] = w * f0 / (1.0 - w * f0);
        }
        w = (v.sum() + u.sum()) / (static_cast<double>(n) + u.sum());
        xx << data.x(), data.x();
        yy << y, Eigen::VectorXd::Zero(n);
        wt << v, u;
        out.beta = weighted_ml_step(family, xx, yy, wt, out.beta, config.ml);
      }
      const double ll_new = cond_loglik(form, family, data, out.beta, w);
      out.iterations = it;
      const double gain = ll_new - ll;
      ll = ll_new;
      if (gain <= config.tol * (1.0 + std::abs(ll))) {
        out.converged = true;
        break;
      }
    }
    out.w = w > 1.0 - 1e-10 ? 1.0 : w;
  }
  out.cond_loglik = cond_loglik(out.model.form, family, data, out.beta, out.w);
  out.n_ht = horvitz_thompson(out.model, data, out.beta, out.w);
  return out;
}

ScoreTestResult score_test_cl(const Family& family, const Dataset& data,
                              const ClConfig& config) {
  ClConfig pinned = config;
  pinned.pin_w = true;
  const ClFit null_fit = cl_fit(family, data, InflationForm::oizt, pinned);
  const Eigen::Index d = data.dim();
  const auto m = static_cast<Eigen::Index>(data.ones());
  const Eigen::VectorXd eta = data.x() * null_fit.beta;

  // U_e(beta_c) ~ sum_i {s_w,i - I_wb' I_bb^{-1} s_b,i}; its variance is
  // estimated by the outer product of those per-unit terms.
  Eigen::VectorXd i_wb = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd i_bb = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd s_w = Eigen::VectorXd::Ones(eta.size());
  Eigen::MatrixXd s_b(eta.size(), d);
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const auto row = data.x().row(i);
    const double yi = data.y()[static_cast<std::size_t>(i)];
    const TruncTerm t = trunc_term(family, eta[i]);
    i_bb.noalias() -= (family.curvature(yi, eta[i]) - t.d2) * row.transpose() * row;
    s_b.row(i) = (family.score(yi, eta[i]) - t.d1) * row;
    if (i < m) {
      const double f0 = family.f0(eta[i]), f1 = family.f1(eta[i]);
      s_w[i] = 1.0 - (1.0 - f0) / f1;
      const double g = ((1.0 - f0) * family.score(1.0, eta[i]) + f0 * family.score(0.0, eta[i])) / f1;
      i_wb -= g * row.transpose();
    }
  }

  ScoreTestResult r;
  r.u = score_u_oizt(family, data, null_fit.beta);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(i_bb);
  if (!lu.isInvertible())
    fail(ErrorCode::singular_information, "score_test_cl: singular information for beta");
  const Eigen::VectorXd adj = lu.solve(i_wb);
  const double info = (s_w - s_b * adj).squaredNorm();
  r.sigma_u2 = info / null_fit.n_ht;
  r.valid = info > 0.0 && std::isfinite(info);
  if (r.valid) {
    r.statistic = r.u / std::sqrt(info);
    r.p_value = num::normal_cdf(r.statistic);
  } else {
    r.statistic = std::numeric_limits<double>::quiet_NaN();
    r.p_value = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

ElFit no_inflation_el_fit(const Family& family, const Dataset& data, const EmConfig& config) {
  return fit(Model{family, InflationForm::none}, data, config);
}

}  // namespace oiel
