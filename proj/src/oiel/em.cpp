#include "oiel/em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "oiel/errors.hpp"
#include "oiel/numerics.hpp"

namespace oiel {

LatentWeights e_step(const Model& model, const Dataset& data, const ElParams& params,
                     double N) {
  const auto n = static_cast<Eigen::Index>(data.n());
  const double w = model.form == InflationForm::none ? 1.0 : params.w;
  const Eigen::VectorXd eta = data.x() * params.beta;
  LatentWeights out{Eigen::VectorXd::Ones(n), Eigen::VectorXd::Zero(n),
                    Eigen::VectorXd::Zero(n)};

  if (model.form != InflationForm::none) {
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(data.ones()); ++i) {
      const double f1 = model.family.f1(eta[i]);
      if (model.form == InflationForm::ztoi) {
        out.v[i] = w * f1 / (1.0 - w + w * f1);
      } else {
        const double f0 = model.family.f0(eta[i]);
        out.v[i] = w * f1 / ((1.0 - w) * (1.0 - f0) + w * f1);
        out.imputed[i] = model.family.moments(eta[i]).mean / (1.0 - f0);
      }
    }
  }

  const double missing = N - static_cast<double>(n);
  if (missing > 0.0) {
    if (!(params.alpha > 0.0))
      fail(ErrorCode::degenerate_model, "e_step: zero probability of never being captured");
    for (Eigen::Index i = 0; i < n; ++i)
      out.u[i] = missing * zero_mass(model.form, model.family, eta[i], w) * params.p[i] /
                 params.alpha;
  }
  return out;
}

ElParams m_step(const Model& model, const Dataset& data, const LatentWeights& weights,
                const ElParams& current, double N, const MlOptions& ml) {
  const auto n = static_cast<Eigen::Index>(data.n());
  const auto m = static_cast<Eigen::Index>(data.ones());
  ElParams next;
  next.N = N;

  switch (model.form) {
    case InflationForm::ztoi:
      next.w = (weights.v.sum() + weights.u.sum()) / (static_cast<double>(n) + weights.u.sum());
      break;
    case InflationForm::oizt:
      next.w = weights.v.sum() / static_cast<double>(n);
      break;
    case InflationForm::none:
      next.w = 1.0;
      break;
  }

  // Observed rows, phantom zeros and (OIZT) imputed inflated ones share x_i,
  // so they collapse into one row with the pooled weight and mean response.
  Eigen::VectorXd total(n);
  Eigen::VectorXd response(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double y = data.y()[static_cast<std::size_t>(i)];
    double wsum = weights.v[i] + weights.u[i];
    double ysum = weights.v[i] * y;
    if (model.form == InflationForm::oizt && i < m) {
      wsum += 1.0 - weights.v[i];
      ysum += (1.0 - weights.v[i]) * weights.imputed[i];
    }
    total[i] = wsum;
    response[i] = wsum > 0.0 ? ysum / wsum : 0.0;
  }
  next.beta = weighted_ml_step(model.family, data.x(), response, total, current.beta, ml);

  next.p = (weights.u.array() + 1.0).matrix();
  next.p /= next.p.sum();
  next.alpha = zero_masses(model, data, next.beta, next.w).dot(next.p);
  return next;
}

namespace {

double n_objective(double N, double n, double alpha) {
  const double base = num::log_choose(N, n);
  return N > n ? base + (N - n) * std::log(alpha) : base;
}

}  // namespace

double update_n(double alpha, std::size_t n_count, double n_max) {
  const double n = static_cast<double>(n_count);
  if (alpha >= 1.0)
    fail(ErrorCode::degenerate_model, "update_n: alpha >= 1 leaves the abundance unbounded");
  if (!(alpha > 0.0)) return n;
  const double log_alpha = std::log(alpha);
  auto slope = [&](double N) {
    return num::digamma(N + 1.0) - num::digamma(N - n + 1.0) + log_alpha;
  };
  const double s_lo = slope(n);
  if (s_lo <= 0.0) return n;
  double hi = std::min(n_max, n / (1.0 - alpha) + 1.0);
  double s_hi = slope(hi);
  while (s_hi > 0.0 && hi < n_max) {
    hi = std::min(n_max, 2.0 * hi);
    s_hi = slope(hi);
  }
  if (s_hi > 0.0) return n_max;
  return num::find_root(slope, n, hi, s_lo, s_hi, 1e-15, 1e-12 * hi);
}

ElParams initial_params(const Model& model, const Dataset& data, double w0,
                        std::optional<double> fixed_n, const MlOptions& ml) {
  const auto n = static_cast<Eigen::Index>(data.n());
  ElParams start;
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = data.y()[static_cast<std::size_t>(i)];
  start.beta = weighted_ml_step(model.family, data.x(), y, Eigen::VectorXd::Ones(n),
                                Eigen::VectorXd::Zero(data.dim()), ml);
  start.w = model.form == InflationForm::none ? 1.0 : w0;
  start.p = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  start.alpha = zero_masses(model, data, start.beta, start.w).dot(start.p);
  if (!(start.alpha < 1.0))
    fail(ErrorCode::degenerate_model, "initial fit puts all mass at zero");
  start.N = fixed_n ? *fixed_n : static_cast<double>(n) / (1.0 - start.alpha);
  return start;
}

namespace {

ElFit run_em(const Model& model, const Dataset& data, const EmConfig& config,
             ElParams params, bool fixed) {
  const double n = static_cast<double>(data.n());
  const double n_max = config.n_max_factor * n;
  ElFit out;
  out.model = model;
  out.fixed_n = fixed;
  double ll = log_el(model, data, params);
  out.trace.push_back({ll, params.N, params.w, params.alpha});

  for (int it = 1; it <= config.max_iter; ++it) {
    const LatentWeights lw = e_step(model, data, params, params.N);
    ElParams next = m_step(model, data, lw, params, params.N, config.ml);
    if (!(next.alpha < 1.0))
      fail(ErrorCode::degenerate_model, "EM: probability of never being captured reached 1");
    if (!fixed) {
      const double proposal = update_n(next.alpha, data.n(), n_max);
      if (n_objective(proposal, n, next.alpha) >= n_objective(next.N, n, next.alpha))
        next.N = proposal;
    }
    const double ll_next = log_el(model, data, next);
    params = std::move(next);
    out.trace.push_back({ll_next, params.N, params.w, params.alpha});
    out.iterations = it;
    const double gain = ll_next - ll;
    ll = ll_next;
    if (gain <= config.tol) {
      out.converged = true;
      break;
    }
  }
  if (params.w > 1.0 - 1e-10) params.w = 1.0;
  out.params = std::move(params);
  out.loglik = ll;
  return out;
}

}  // namespace

ElFit fit(const Model& model, const Dataset& data, const EmConfig& config,
          std::optional<double> fixed_n) {
  if (data.n() == 0) fail(ErrorCode::invalid_argument, "fit: empty dataset");
  if (!(config.tol > 0.0)) fail(ErrorCode::invalid_argument, "fit: tol must be positive");
  if (fixed_n && !(*fixed_n >= static_cast<double>(data.n())))
    fail(ErrorCode::invalid_argument, "fit: fixed N below the number of captured units");

  std::vector<ElParams> starts;
  if (config.init) {
    ElParams s = *config.init;
    if (model.form == InflationForm::none) s.w = 1.0;
    s.alpha = zero_masses(model, data, s.beta, s.w).dot(s.p);
    if (fixed_n) s.N = *fixed_n;
    starts.push_back(std::move(s));
  } else if (model.form == InflationForm::none) {
    starts.push_back(initial_params(model, data, 1.0, fixed_n, config.ml));
  } else {
    for (double w0 : config.start_w)
      starts.push_back(initial_params(model, data, w0, fixed_n, config.ml));
  }

  std::optional<ElFit> best;
  std::optional<Error> last_error;
  int runs = 0;
  double max_decrease = 0.0;
  for (auto& s : starts) {
    try {
      ElFit candidate = run_em(model, data, config, std::move(s), fixed_n.has_value());
      ++runs;
      for (std::size_t t = 1; t < candidate.trace.size(); ++t)
        max_decrease =
            std::max(max_decrease, candidate.trace[t - 1].loglik - candidate.trace[t].loglik);
      if (!best || candidate.loglik > best->loglik) best = std::move(candidate);
    } catch (const Error& e) {
      last_error = e;
    }
  }
  if (!best) throw *last_error;
  best->runs = runs;
  best->max_decrease = max_decrease;
  return std::move(*best);
}

}  // namespace oiel
