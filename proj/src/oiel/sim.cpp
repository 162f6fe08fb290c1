#include "oiel/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <optional>
#include <thread>

#include "oiel/baselines.hpp"
#include "oiel/errors.hpp"
#include "oiel/numerics.hpp"

namespace oiel {

Eigen::VectorXd true_beta(Scenario scenario) {
  Eigen::VectorXd beta(2);
  beta << (scenario == Scenario::a ? -1.5 : -2.1), 0.1;
  return beta;
}

InflationForm scenario_form(Scenario scenario) {
  return scenario == Scenario::a ? InflationForm::ztoi : InflationForm::oizt;
}

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::mt19937_64 replication_stream(std::uint64_t seed, std::uint64_t rep) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(rep + 0x632be59bd9b4e019ULL)));
}

Generated generate(const ScenarioConfig& config, std::mt19937_64& rng) {
  if (config.n0 < 1) fail(ErrorCode::invalid_argument, "generate: N0 must be >= 1");
  if (!(config.w0 > 0.0 && config.w0 <= 1.0))
    fail(ErrorCode::invalid_argument, "generate: w0 must lie in (0, 1]");
  const Eigen::VectorXd beta = true_beta(config.scenario);
  std::normal_distribution<double> covariate(kCovariateMean, std::sqrt(kCovariateVariance));
  std::bernoulli_distribution from_f(config.w0);

  for (int attempt = 0;; ++attempt) {
    std::vector<double> xs;
    std::vector<int> ys;
    for (int i = 0; i < config.n0; ++i) {
      const double x = covariate(rng);
      const double lambda = std::exp(beta[0] + beta[1] * x);
      std::poisson_distribution<int> count(lambda);
      const int y_star = count(rng);
      const bool z = from_f(rng);
      int y;
      if (config.scenario == Scenario::a)
        y = z ? y_star : 1;
      else
        y = z ? y_star : (y_star > 0 ? 1 : 0);
      if (y > 0) {
        xs.push_back(x);
        ys.push_back(y);
      }
    }
    if (ys.empty()) {
      if (attempt > 1000) fail(ErrorCode::degenerate_model, "generate: nobody is ever captured");
      continue;
    }
    Eigen::MatrixXd cov(static_cast<Eigen::Index>(xs.size()), 1);
    for (std::size_t i = 0; i < xs.size(); ++i) cov(static_cast<Eigen::Index>(i), 0) = xs[i];
    return {Dataset::from_covariates(cov, std::move(ys), 0, {"x"}), attempt};
  }
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class F>
void attempt(Replication& r, const char* what, F&& body) {
  try {
    body();
  } catch (const std::exception& e) {
    r.errors.push_back(std::string(what) + ": " + e.what());
  }
}

}  // namespace

Replication run_replication(const ScenarioConfig& config, const MethodSet& methods,
                            std::uint64_t rep) {
  std::mt19937_64 rng = replication_stream(config.seed, rep);
  const Generated g = generate(config, rng);
  const Dataset& data = g.data;
  const Family poisson = Family::poisson();
  const double n0 = config.n0;

  Replication r;
  r.n = data.n();
  r.m = data.ones();
  r.redraws = g.redraws;
  r.n_el = r.w_el = r.sigma2 = r.r_n0 = r.n_null = r.n_ht = r.s = r.s_e = r.s_c = kNaN;
  r.u0 = score_u_ztoi(poisson, data, n0, true_beta(config.scenario)) / n0;

  auto count = [&](int runs, double decrease) {
    r.fits += runs;
    r.max_decrease = std::max(r.max_decrease, decrease);
  };

  if (methods.el) {
    attempt(r, "el", [&] {
      const Model model{poisson, scenario_form(config.scenario)};
      const ElFit f = fit(model, data);
      count(f.runs, f.max_decrease);
      r.n_el = f.params.N;
      r.w_el = f.params.w;
      r.el_ok = true;
      r.el_converged = f.converged;
      if (!methods.el_ratio) return;
      attempt(r, "el_ratio", [&] {
        const ElRatio R = el_ratio(data, n0, f);
        count(R.runs, R.max_decrease);
        r.r_n0 = R.value;
        r.ratio_ok = R.converged;
      });
      attempt(r, "sigma2", [&] {
        r.sigma2 = model.form == InflationForm::ztoi ? sigma2_ztoi(f, data) : sigma2_oizt(f, data);
        r.sigma2_ok = std::isfinite(r.sigma2);
      });
    });
  }

  std::optional<ElFit> null_fit;
  if (methods.no_inflation || methods.score) {
    attempt(r, "no_inflation", [&] {
      null_fit = no_inflation_el_fit(poisson, data);
      count(null_fit->runs, null_fit->max_decrease);
      r.n_null = null_fit->params.N;
      r.null_ok = null_fit->converged;
    });
  }
  if (methods.score && null_fit) {
    attempt(r, "score", [&] {
      const ScoreTests t = score_tests(data, *null_fit);
      r.s = t.s.statistic;
      r.s_ok = t.s.valid;
      r.s_e = t.s_e.statistic;
      r.s_e_ok = t.s_e.valid;
    });
  }
  if (methods.cl) {
    attempt(r, "cl", [&] {
      r.n_ht = cl_fit(poisson, data, InflationForm::oizt).n_ht;
      r.cl_ok = true;
    });
  }
  if (methods.score_cl) {
    attempt(r, "score_cl", [&] {
      const ScoreTestResult t = score_test_cl(poisson, data);
      r.s_c = t.statistic;
      r.s_c_ok = t.valid;
    });
  }
  return r;
}

namespace {

EstimateSummary summarize(const std::vector<Replication>& reps, double n0,
                          double Replication::*value, bool Replication::*ok,
                          const bool Replication::*converged = nullptr) {
  EstimateSummary s;
  double sum = 0.0, sq = 0.0;
  for (const auto& r : reps) {
    if (!(r.*ok) || (converged && !(r.*converged)) || !std::isfinite(r.*value)) {
      ++s.failures;
      continue;
    }
    ++s.count;
    sum += r.*value;
    sq += (r.*value - n0) * (r.*value - n0);
  }
  if (s.count > 0) {
    s.mean = sum / s.count;
    s.rmse = sq / s.count / n0;
  } else {
    s.mean = s.rmse = kNaN;
  }
  return s;
}

RejectionRates rejections(const std::vector<Replication>& reps, double Replication::*stat,
                          bool Replication::*ok, bool Replication::*fit_ok) {
  RejectionRates out;
  const double z01 = num::normal_quantile(0.01), z05 = num::normal_quantile(0.05),
               z10 = num::normal_quantile(0.10);
  int k01 = 0, k05 = 0, k10 = 0;
  for (const auto& r : reps) {
    if (fit_ok && !(r.*fit_ok)) continue;
    if (!(r.*ok)) {
      ++out.invalid;
      continue;
    }
    ++out.count;
    k01 += r.*stat <= z01;
    k05 += r.*stat <= z05;
    k10 += r.*stat <= z10;
  }
  // invalid variance estimates never reject but stay in the denominator
  const int total = out.count + out.invalid;
  if (total > 0) {
    out.at01 = static_cast<double>(k01) / total;
    out.at05 = static_cast<double>(k05) / total;
    out.at10 = static_cast<double>(k10) / total;
  }
  return out;
}

}  // namespace

ReplicationSummary run_study(const ScenarioConfig& config, const MethodSet& methods) {
  if (config.reps < 1) fail(ErrorCode::invalid_argument, "run_study: reps must be >= 1");
  if (!(config.level > 0.0 && config.level <= 0.5))
    fail(ErrorCode::invalid_argument, "run_study: level must lie in (0, 0.5]");
  ReplicationSummary out;
  out.config = config;
  out.methods = methods;
  out.reps.resize(static_cast<std::size_t>(config.reps));

  unsigned workers = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                        : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(config.reps));
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < config.reps; i = next++) {
      Replication& slot = out.reps[static_cast<std::size_t>(i)];
      try {
        slot = run_replication(config, methods, static_cast<std::uint64_t>(i));
      } catch (const std::exception& e) {
        slot = Replication{};
        slot.errors.push_back(std::string("generate: ") + e.what());
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  const double n0 = config.n0;
  const auto& reps = out.reps;
  out.el = summarize(reps, n0, &Replication::n_el, &Replication::el_ok, &Replication::el_converged);
  out.no_inflation = summarize(reps, n0, &Replication::n_null, &Replication::null_ok);
  out.cl = summarize(reps, n0, &Replication::n_ht, &Replication::cl_ok);
  out.s = rejections(reps, &Replication::s, &Replication::s_ok, &Replication::null_ok);
  out.s_e = rejections(reps, &Replication::s_e, &Replication::s_e_ok, &Replication::null_ok);
  out.s_c = rejections(reps, &Replication::s_c, &Replication::s_c_ok, nullptr);

  const double a = config.level;
  const double thr2 = num::chisq1_quantile(1.0 - a), thr1 = num::chisq1_quantile(1.0 - 2.0 * a);
  const double z2 = num::normal_quantile(1.0 - a / 2.0), z1 = num::normal_quantile(1.0 - a);
  int el_two = 0, el_lo = 0, el_up = 0, wd_two = 0, wd_lo = 0, wd_up = 0;
  double u_sum = 0.0, u_sq = 0.0;
  for (const auto& r : reps) {
    out.fits += r.fits;
    out.max_decrease = std::max(out.max_decrease, r.max_decrease);
    out.redraws += r.redraws;
    u_sum += r.u0;
    u_sq += r.u0 * r.u0;
    if (!r.el_ok) continue;
    if (r.ratio_ok) {
      ++out.el_coverage.count;
      el_two += r.r_n0 <= thr2;
      el_lo += n0 >= r.n_el || r.r_n0 <= thr1;
      el_up += n0 <= r.n_el || r.r_n0 <= thr1;
    }
    if (r.sigma2_ok) {
      ++out.wald_coverage.count;
      const double se = std::sqrt(r.n_el * std::max(0.0, r.sigma2));
      wd_two += std::abs(r.n_el - n0) <= z2 * se;
      wd_lo += n0 >= r.n_el - z1 * se;
      wd_up += n0 <= r.n_el + z1 * se;
    }
  }
  auto rate = [](int k, int total) { return total > 0 ? static_cast<double>(k) / total : kNaN; };
  out.el_coverage.two_sided = rate(el_two, out.el_coverage.count);
  out.el_coverage.lower = rate(el_lo, out.el_coverage.count);
  out.el_coverage.upper = rate(el_up, out.el_coverage.count);
  out.wald_coverage.two_sided = rate(wd_two, out.wald_coverage.count);
  out.wald_coverage.lower = rate(wd_lo, out.wald_coverage.count);
  out.wald_coverage.upper = rate(wd_up, out.wald_coverage.count);
  const double k = static_cast<double>(reps.size());
  out.u0_mean = u_sum / k;
  out.u0_se = k > 1 ? std::sqrt(std::max(0.0, (u_sq - k * out.u0_mean * out.u0_mean) / (k - 1)) / k)
                    : kNaN;
  return out;
}

QqData qq_data(const ReplicationSummary& summary) {
  QqData q;
  const double n0 = summary.config.n0;
  for (const auto& r : summary.reps) {
    if (!r.el_ok) continue;
    if (r.sigma2_ok && r.sigma2 > 0.0)
      q.pivotal.push_back((r.n_el - n0) / std::sqrt(r.n_el * r.sigma2));
    if (r.ratio_ok) q.ratio.push_back(r.r_n0);
  }
  std::sort(q.pivotal.begin(), q.pivotal.end());
  std::sort(q.ratio.begin(), q.ratio.end());
  const auto kp = static_cast<double>(q.pivotal.size());
  for (std::size_t i = 0; i < q.pivotal.size(); ++i)
    q.normal_quantiles.push_back(num::normal_quantile((static_cast<double>(i) + 0.5) / kp));
  const auto kr = static_cast<double>(q.ratio.size());
  for (std::size_t i = 0; i < q.ratio.size(); ++i)
    q.chisq_quantiles.push_back(num::chisq1_quantile((static_cast<double>(i) + 0.5) / kr));
  return q;
}

QqData qq_data(const ScenarioConfig& config) {
  MethodSet methods;
  return qq_data(run_study(config, methods));
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    fail(ErrorCode::invalid_argument, "ls_slope: need two or more paired points");
  const double k = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= k;
  my /= k;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace oiel
