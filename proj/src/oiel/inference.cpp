#include "oiel/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "oiel/errors.hpp"
#include "oiel/numerics.hpp"

namespace oiel {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_canonical(const Family& family, const char* what) {
  if (family.kind() == FamilyKind::geometric)
    fail(ErrorCode::unsupported,
         std::string(what) + ": plug-in variance blocks are available for binomial and "
                             "Poisson families only");
}

struct Unit {
  double f0, f1, e, v;
};

Unit unit_at(const Family& family, double eta) {
  const Moments mv = family.moments(eta);
  return {family.f0(eta), family.f1(eta), mv.mean, mv.var};
}

Eigen::VectorXd weights_from(const Model& model, const Dataset& data,
                             const Eigen::VectorXd& beta, double w, double N) {
  const Eigen::VectorXd c = zero_masses(model, data, beta, w);
  Eigen::VectorXd out(c.size());
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    const double capture = 1.0 - c[i];
    if (!(capture > 0.0))
      fail(ErrorCode::domain, "plug-in expectation: unit " + std::to_string(i + 1) +
                                  " has zero capture probability");
    out[i] = 1.0 / (N * capture);
  }
  return out;
}

Eigen::MatrixXd solve_checked(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                              const char* what) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible())
    fail(ErrorCode::singular_information, std::string(what) + ": singular information block");
  Eigen::MatrixXd x = lu.solve(b);
  const double scale = std::max(1.0, b.norm());
  if (!((a * x - b).norm() <= 1e-8 * scale))
    fail(ErrorCode::singular_information, std::string(what) + ": ill-conditioned information block");
  return x;
}

}  // namespace

Eigen::VectorXd plug_in_weights(const ElFit& fit, const Dataset& data) {
  return weights_from(fit.model, data, fit.params.beta, fit.params.w, fit.params.N);
}

double plug_in_expectation(const std::function<double(const Eigen::VectorXd&)>& J,
                           const ElFit& fit, const Dataset& data) {
  const Eigen::VectorXd omega = plug_in_weights(fit, data);
  double s = 0.0;
  for (Eigen::Index i = 0; i < omega.size(); ++i) {
    const Eigen::VectorXd xi = data.x().row(i).transpose();
    s += omega[i] * J(xi);
  }
  return s;
}

VBlocks v_blocks(const Family& family, const Dataset& data, const Eigen::VectorXd& beta,
                 double w, double alpha, double N) {
  require_canonical(family, "v_blocks");
  if (!(alpha > 0.0 && alpha < 1.0))
    fail(ErrorCode::domain, "v_blocks: alpha must lie in (0, 1)");
  if (!(w > 0.0 && w <= 1.0)) fail(ErrorCode::domain, "v_blocks: w must lie in (0, 1]");
  const Model model{family, InflationForm::ztoi};
  const Eigen::VectorXd omega = weights_from(model, data, beta, w, N);
  const Eigen::Index d = data.dim();
  const Eigen::VectorXd eta = data.x() * beta;

  VBlocks v;
  v.alpha = alpha;
  v.v22 = Eigen::MatrixXd::Zero(d, d);
  v.v23 = Eigen::VectorXd::Zero(d);
  v.v24 = Eigen::VectorXd::Zero(d);
  for (Eigen::Index i = 0; i < omega.size(); ++i) {
    const Unit u = unit_at(family, eta[i]);
    const Eigen::VectorXd x = data.x().row(i).transpose();
    const double cap = 1.0 - w * u.f0;
    const double one = 1.0 - w + w * u.f1;
    const double k22 = w * (u.f0 * u.e * u.e / cap - u.v +
                            (1.0 - w) * u.f1 * (1.0 - u.e) * (1.0 - u.e) / one);
    v.v22.noalias() += omega[i] * k22 * (x * x.transpose());
    v.v23 += omega[i] * (u.f1 * (1.0 - u.e) / one - u.f0 * u.e / cap) * x;
    v.v24 += omega[i] * (w * u.f0 * u.e / cap) * x;
    v.v33 += omega[i] * (-(1.0 - u.f1) * (1.0 - u.f1) / one - (1.0 - u.f0 - u.f1) / w +
                         u.f0 * u.f0 / cap);
    v.v34 -= omega[i] * u.f0 / cap;
    v.phi += omega[i] / cap;
  }
  const double q = 1.0 - alpha;
  v.v11 = 1.0 - 1.0 / alpha;
  v.v14 = 1.0 / alpha;
  v.v25 = q * q * v.v24;
  v.v35 = q * q * v.v34;
  v.v44 = v.phi - 1.0 / alpha;
  v.v45 = q * q * v.phi;
  v.v55 = std::pow(q, 4) * v.phi - std::pow(q, 3);
  return v;
}

Eigen::MatrixXd assemble_w(const VBlocks& v) {
  const Eigen::Index d = v.v22.rows();
  const Eigen::Index iw = d + 1, ia = d + 2;
  if (v.v55 == 0.0) fail(ErrorCode::singular_information, "assemble_w: V55 vanishes");
  const double r = 1.0 / v.v55;
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(d + 3, d + 3);
  W(0, 0) = -v.v11;
  W(0, ia) = W(ia, 0) = -v.v14;
  W.block(1, 1, d, d) = -v.v22 + r * v.v25 * v.v25.transpose();
  W.block(1, iw, d, 1) = -v.v23 + r * v.v35 * v.v25;
  W.block(1, ia, d, 1) = -v.v24 + r * v.v45 * v.v25;
  W.block(iw, 1, 1, d) = W.block(1, iw, d, 1).transpose();
  W.block(ia, 1, 1, d) = W.block(1, ia, d, 1).transpose();
  W(iw, iw) = -v.v33 + r * v.v35 * v.v35;
  W(iw, ia) = W(ia, iw) = -v.v34 + r * v.v35 * v.v45;
  W(ia, ia) = -v.v44 + r * v.v45 * v.v45;
  return W;
}

Eigen::MatrixXd assemble_w_null(const VBlocks& v) {
  const Eigen::MatrixXd W = assemble_w(v);
  const Eigen::Index d = v.v22.rows();
  const Eigen::Index k = d + 2;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < d + 3; ++j)
    if (j != d + 1) keep.push_back(j);
  Eigen::MatrixXd out(k, k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b) out(a, b) = W(keep[a], keep[b]);
  return out;
}

double sigma2_from_blocks(const VBlocks& v, bool with_w) {
  const Eigen::Index d = v.v22.rows();
  if (!with_w) {
    const Eigen::MatrixXd x = solve_checked(v.v22, v.v24, "sigma2");
    return v.phi - 1.0 - v.v24.dot(x.col(0));
  }
  Eigen::MatrixXd a(d + 1, d + 1);
  a.topLeftCorner(d, d) = v.v22;
  a.topRightCorner(d, 1) = v.v23;
  a.bottomLeftCorner(1, d) = v.v23.transpose();
  a(d, d) = v.v33;
  Eigen::VectorXd b(d + 1);
  b.head(d) = v.v24;
  b[d] = v.v34;
  const Eigen::MatrixXd x = solve_checked(a, b, "sigma2");
  return v.phi - 1.0 - b.dot(x.col(0));
}

double sigma2_ztoi(const ElFit& fit, const Dataset& data) {
  const ElParams& p = fit.params;
  const VBlocks v = v_blocks(fit.model.family, data, p.beta, p.w, p.alpha, p.N);
  return sigma2_from_blocks(v, fit.model.form == InflationForm::ztoi && p.w < 1.0);
}

Eigen::MatrixXd observed_information(const ElFit& fit, const Dataset& data) {
  const ElParams& p = fit.params;
  const Eigen::Index d = data.dim();
  const bool free_w = fit.model.form != InflationForm::none && p.w < 1.0 - 2e-5;
  const Eigen::Index k = d + 2 + (free_w ? 1 : 0);
  const Eigen::Index ia = k - 1;

  Eigen::VectorXd theta(k);
  Eigen::VectorXd h(k);
  theta[0] = p.N;
  h[0] = 1e-3 * p.N;
  for (Eigen::Index j = 0; j < d; ++j) {
    theta[1 + j] = p.beta[j];
    const double scale = data.x().col(j).cwiseAbs().maxCoeff();
    h[1 + j] = 1e-3 / std::max(scale, 1e-8);
  }
  if (free_w) {
    theta[d + 1] = p.w;
    h[d + 1] = std::min(1e-3, (1.0 - p.w) / 2.0);
  }
  theta[ia] = p.alpha;
  h[ia] = 1e-3 * std::min(p.alpha, 1.0 - p.alpha);

  auto f = [&](const Eigen::VectorXd& t) {
    const double w = free_w ? t[d + 1] : p.w;
    const double v = profile_log_el(fit.model, data, t[0], t.segment(1, d), w, t[ia]);
    if (!std::isfinite(v))
      fail(ErrorCode::singular_information,
           "observed information: profile log-EL undefined near the estimate");
    return v;
  };

  const double f00 = f(theta);
  Eigen::MatrixXd H(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    Eigen::VectorXd t = theta;
    t[a] = theta[a] + h[a];
    const double fp = f(t);
    t[a] = theta[a] - h[a];
    const double fm = f(t);
    H(a, a) = (fp - 2.0 * f00 + fm) / (h[a] * h[a]);
    for (Eigen::Index b = 0; b < a; ++b) {
      double acc = 0.0;
      for (int sa : {1, -1})
        for (int sb : {1, -1}) {
          Eigen::VectorXd u = theta;
          u[a] += sa * h[a];
          u[b] += sb * h[b];
          acc += sa * sb * f(u);
        }
      H(a, b) = H(b, a) = acc / (4.0 * h[a] * h[b]);
    }
  }
  return -H;
}

namespace {

// (N, beta, [w], alpha) covariance from the observed information.
Eigen::MatrixXd observed_covariance(const ElFit& fit, const Dataset& data) {
  const Eigen::MatrixXd info = observed_information(fit, data);
  Eigen::LLT<Eigen::MatrixXd> llt(info);
  if (llt.info() != Eigen::Success)
    fail(ErrorCode::singular_information,
         "observed information of the profile log-EL is not positive definite");
  return llt.solve(Eigen::MatrixXd::Identity(info.rows(), info.cols()));
}

}  // namespace

double sigma2_oizt(const ElFit& fit, const Dataset& data) {
  const Eigen::MatrixXd cov = observed_covariance(fit, data);
  return cov(0, 0) / fit.params.N;
}

ElRatio el_ratio(const Dataset& data, double N, const ElFit& global, const EmConfig& config) {
  if (!(N >= static_cast<double>(data.n())))
    fail(ErrorCode::invalid_argument, "el_ratio: N below the number of captured units");
  EmConfig cfg = config;
  cfg.init = global.params;
  const ElFit constrained = fit(global.model, data, cfg, N);
  return {std::max(0.0, 2.0 * (global.loglik - constrained.loglik)), constrained.converged,
          constrained.runs, constrained.max_decrease};
}

Interval ci_el(const Dataset& data, const ElFit& fit_global, double level,
               const EmConfig& config) {
  if (!(level > 0.0 && level < 1.0)) fail(ErrorCode::invalid_argument, "ci_el: level in (0, 1)");
  const double n = static_cast<double>(data.n());
  const double nhat = fit_global.params.N;
  const double thr = num::chisq1_quantile(1.0 - level);
  const double n_max = config.n_max_factor * n;
  auto g = [&](double N) { return el_ratio(data, N, fit_global, config).value - thr; };
  const double ftol = 1e-5;

  Interval out{nhat, nhat};
  if (nhat > n) {
    const double g_lo = g(n);
    if (g_lo <= 0.0)
      out.lower = n;
    else
      out.lower = num::find_root(g, n, nhat, g_lo, -thr, ftol, 1e-9 * nhat);
  }

  double step = std::max(1.0, 0.05 * nhat);
  double lo = nhat, g_prev = -thr;
  for (;;) {
    const double hi = std::min(n_max, lo + step);
    const double g_hi = g(hi);
    if (g_hi > 0.0) {
      out.upper = num::find_root(g, lo, hi, g_prev, g_hi, ftol, 1e-9 * hi);
      break;
    }
    if (hi >= n_max) {
      out.upper = num::kInf;
      break;
    }
    lo = hi;
    g_prev = g_hi;
    step *= 2.0;
  }
  return out;
}

Interval ci_wald(const ElFit& fit, double sigma2, double level, std::size_t n) {
  if (!(sigma2 >= 0.0)) fail(ErrorCode::invalid_argument, "ci_wald: negative variance");
  if (!(level > 0.0 && level < 1.0))
    fail(ErrorCode::invalid_argument, "ci_wald: level in (0, 1)");
  const double z = num::normal_quantile(1.0 - level / 2.0);
  const double half = z * std::sqrt(fit.params.N * sigma2);
  return {std::max(static_cast<double>(n), fit.params.N - half), fit.params.N + half};
}

InferenceReport infer(const Dataset& data, const ElFit& fit, double level,
                      const EmConfig& config) {
  InferenceReport r;
  r.level = level;
  const ElParams& p = fit.params;
  const Eigen::Index d = data.dim();
  const bool analytic = fit.model.form != InflationForm::oizt &&
                        fit.model.family.kind() != FamilyKind::geometric;
  const double nhat = p.N;

  if (analytic) {
    const VBlocks v = v_blocks(fit.model.family, data, p.beta, p.w, p.alpha, p.N);
    const bool with_w = fit.model.form == InflationForm::ztoi && p.w < 1.0;
    r.sigma2 = sigma2_from_blocks(v, with_w);
    r.variance_method = "plug_in";
    const Eigen::MatrixXd W = with_w ? assemble_w(v) : assemble_w_null(v);
    const Eigen::MatrixXd cov =
        solve_checked(W, Eigen::MatrixXd::Identity(W.rows(), W.cols()), "infer") / nhat;
    r.se_beta = cov.diagonal().segment(1, d).cwiseMax(0.0).cwiseSqrt();
    r.se_w = with_w ? std::sqrt(std::max(0.0, cov(d + 1, d + 1))) : kNaN;
    r.se_alpha = std::sqrt(std::max(0.0, cov(W.rows() - 1, W.rows() - 1)));
  } else {
    const Eigen::MatrixXd cov = observed_covariance(fit, data);
    const Eigen::Index k = cov.rows();
    const bool with_w = k == d + 3;
    r.sigma2 = cov(0, 0) / nhat;
    r.variance_method = "observed_information";
    r.se_beta = cov.diagonal().segment(1, d).cwiseMax(0.0).cwiseSqrt();
    r.se_w = with_w ? std::sqrt(std::max(0.0, cov(d + 1, d + 1))) : kNaN;
    r.se_alpha = std::sqrt(std::max(0.0, cov(k - 1, k - 1)));
  }
  if (r.sigma2 < 0.0) {
    r.sigma2 = 0.0;
    r.variance_floored = true;
  }
  r.se_n = std::sqrt(nhat * r.sigma2);
  r.ci_wald = ci_wald(fit, r.sigma2, level, data.n());
  EmConfig tight = config;
  tight.tol = std::min(config.tol, 1e-8);
  r.ci_el = ci_el(data, fit, level, tight);
  return r;
}

double score_u_ztoi(const Family& family, const Dataset& data, double N,
                    const Eigen::VectorXd& beta) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(data.ones()); ++i) {
    const double f1 = family.f1(data.x().row(i).dot(beta));
    if (!(f1 > 0.0)) fail(ErrorCode::domain, "score_u: f(1) vanishes");
    s += 1.0 / f1;
  }
  return N - s;
}

double score_u_oizt(const Family& family, const Dataset& data, const Eigen::VectorXd& beta) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(data.ones()); ++i) {
    const double eta = data.x().row(i).dot(beta);
    const double f1 = family.f1(eta);
    if (!(f1 > 0.0)) fail(ErrorCode::domain, "score_u: f(1) vanishes");
    s += (1.0 - family.f0(eta)) / f1;
  }
  return static_cast<double>(data.n()) - s;
}

ScoreTests score_tests(const Dataset& data, const ElFit& null_fit) {
  const Family& family = null_fit.model.family;
  require_canonical(family, "score_tests");
  if (null_fit.model.form != InflationForm::none)
    fail(ErrorCode::invalid_argument, "score_tests: the null fit must pin w = 1");
  const ElParams& p = null_fit.params;
  const double nt = p.N;
  const Eigen::Index d = data.dim();
  const VBlocks v = v_blocks(family, data, p.beta, 1.0, p.alpha, nt);
  const Eigen::MatrixXd ws = assemble_w_null(v);
  const Eigen::VectorXd omega = weights_from(null_fit.model, data, p.beta, 1.0, nt);
  const Eigen::VectorXd eta = data.x() * p.beta;

  double v66s = -1.0, v66e = -(1.0 - p.alpha);
  Eigen::VectorXd vs = Eigen::VectorXd::Zero(d), vse = Eigen::VectorXd::Zero(d);
  for (Eigen::Index i = 0; i < omega.size(); ++i) {
    const Unit u = unit_at(family, eta[i]);
    const Eigen::VectorXd x = data.x().row(i).transpose();
    v66s += omega[i] / u.f1;
    v66e += omega[i] * (1.0 - u.f0) * (1.0 - u.f0) / u.f1;
    vs += omega[i] * (1.0 - u.e) * x;
    vse += omega[i] * (1.0 - u.f0 - u.e) * x;
  }

  // U depends on N with unit slope; U_e does not depend on N at all. The
  // beta-score covariance with U_e(beta0) is -V_se, so both variances take
  // the form V66 - a' W_s^{-1} a.
  Eigen::VectorXd a = Eigen::VectorXd::Zero(d + 2), ae = Eigen::VectorXd::Zero(d + 2);
  a[0] = 1.0;
  a.segment(1, d) = vs;
  ae.segment(1, d) = vse;
  Eigen::MatrixXd rhs(d + 2, 2);
  rhs << a, ae;
  const Eigen::MatrixXd sol = solve_checked(ws, rhs, "score_tests");

  auto finish = [&](double u, double s2) {
    ScoreTestResult r;
    r.u = u;
    r.sigma_u2 = s2;
    r.null_fit = null_fit;
    r.valid = s2 > 0.0 && std::isfinite(s2);
    if (r.valid) {
      r.statistic = u / std::sqrt(nt * s2);
      r.p_value = num::normal_cdf(r.statistic);
    } else {
      r.statistic = kNaN;
      r.p_value = kNaN;
    }
    return r;
  };

  ScoreTests out;
  out.s = finish(score_u_ztoi(family, data, nt, p.beta), v66s - a.dot(sol.col(0)));
  out.s_e = finish(score_u_oizt(family, data, p.beta), v66e - ae.dot(sol.col(1)));
  return out;
}

ScoreTests score_tests(const Family& family, const Dataset& data, const EmConfig& config) {
  require_canonical(family, "score_tests");
  const ElFit null_fit = fit(Model{family, InflationForm::none}, data, config);
  return score_tests(data, null_fit);
}

ScoreTestResult score_test(InflationForm form, const Family& family, const Dataset& data,
                           const EmConfig& config) {
  if (form == InflationForm::none)
    fail(ErrorCode::invalid_argument, "score_test: choose the ZTOI or OIZT alternative");
  ScoreTests both = score_tests(family, data, config);
  return form == InflationForm::ztoi ? std::move(both.s) : std::move(both.s_e);
}

}  // namespace oiel
