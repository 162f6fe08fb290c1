#include "oiel/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace oiel {

namespace {

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::string fixed(double v, int digits) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string bin_label(const GofBin& b) {
  if (b.upper < 0) return ">=" + std::to_string(b.lower);
  if (b.upper == b.lower) return std::to_string(b.lower);
  return std::to_string(b.lower) + "-" + std::to_string(b.upper);
}

Json estimate_json(const EstimateSummary& s) {
  return {{"mean", number(s.mean)}, {"rel_mse", number(s.rmse)}, {"count", s.count},
          {"failures", s.failures}};
}

Json rates_json(const RejectionRates& r) {
  return {{"0.01", number(r.at01)}, {"0.05", number(r.at05)}, {"0.10", number(r.at10)},
          {"count", r.count}, {"invalid_variance", r.invalid}};
}

Json coverage_json(const Coverage& c) {
  return {{"two_sided", number(c.two_sided)}, {"lower_limit", number(c.lower)},
          {"upper_limit", number(c.upper)}, {"count", c.count}};
}

}  // namespace

Json provenance() { return {{"library", "oiel"}, {"version", OIEL_VERSION_STRING}}; }

Json to_json(const Model& model) {
  Json j = {{"form", form_name(model.form)}, {"family", model.family.name()}};
  if (model.family.kind() == FamilyKind::binomial) j["trials"] = model.family.trials();
  return j;
}

Json to_json(const Interval& interval) {
  return Json::array({number(interval.lower), number(interval.upper)});
}

Json to_json(const ElFit& fit, const Dataset& data) {
  Json beta = Json::object();
  beta["(intercept)"] = number(fit.params.beta[0]);
  for (Eigen::Index j = 1; j < data.dim(); ++j)
    beta[data.names()[static_cast<std::size_t>(j - 1)]] = number(fit.params.beta[j]);
  return {{"model", to_json(fit.model)},
          {"n", data.n()},
          {"m", data.ones()},
          {"N_hat", number(fit.params.N)},
          {"beta", beta},
          {"w_hat", number(fit.params.w)},
          {"alpha_hat", number(fit.params.alpha)},
          {"loglik", number(fit.loglik)},
          {"converged", fit.converged},
          {"iterations", fit.iterations}};
}

Json to_json(const InferenceReport& r) {
  Json se_beta = Json::array();
  for (Eigen::Index j = 0; j < r.se_beta.size(); ++j) se_beta.push_back(number(r.se_beta[j]));
  return {{"level", r.level},
          {"sigma2", number(r.sigma2)},
          {"variance_method", r.variance_method},
          {"variance_floored", r.variance_floored},
          {"se", {{"N", number(r.se_n)}, {"beta", se_beta}, {"w", number(r.se_w)},
                  {"alpha", number(r.se_alpha)}}},
          {"ci_el", to_json(r.ci_el)},
          {"ci_wald", to_json(r.ci_wald)}};
}

Json to_json(const ScoreTestResult& t, const std::string& name) {
  Json j = {{"test", name},
            {"statistic", number(t.statistic)},
            {"u", number(t.u)},
            {"sigma_u2", number(t.sigma_u2)},
            {"p_value", number(t.p_value)},
            {"valid_variance", t.valid}};
  if (t.null_fit) j["N_tilde"] = number(t.null_fit->params.N);
  return j;
}

Json to_json(const ClFit& f) {
  Json beta = Json::array();
  for (Eigen::Index j = 0; j < f.beta.size(); ++j) beta.push_back(number(f.beta[j]));
  return {{"model", to_json(f.model)}, {"beta", beta},
          {"w", number(f.w)},          {"cond_loglik", number(f.cond_loglik)},
          {"N_HT", number(f.n_ht)},    {"converged", f.converged}};
}

Json to_json(const GofReport& r) {
  Json bins = Json::array();
  for (const auto& b : r.bins)
    bins.push_back({{"bin", bin_label(b)}, {"observed", b.observed}, {"fitted", number(b.fitted)}});
  return {{"bins", bins}, {"chi2", number(r.chi2)}, {"df", r.df}, {"notes", r.notes}};
}

Json to_json(const ReplicationSummary& s, bool raw) {
  const ScenarioConfig& c = s.config;
  Json j = {{"scenario", c.scenario == Scenario::a ? "A" : "B"},
            {"N0", c.n0},
            {"w0", c.w0},
            {"reps", c.reps},
            {"seed", c.seed},
            {"level", c.level}};
  Json est = Json::object();
  if (s.methods.el) est["el"] = estimate_json(s.el);
  if (s.methods.no_inflation) est["no_inflation_el"] = estimate_json(s.no_inflation);
  if (s.methods.cl) est["cl_horvitz_thompson"] = estimate_json(s.cl);
  j["estimates"] = est;
  Json rej = Json::object();
  if (s.methods.score) {
    rej["S"] = rates_json(s.s);
    rej["S_e"] = rates_json(s.s_e);
  }
  if (s.methods.score_cl) rej["S_c"] = rates_json(s.s_c);
  j["rejection_rates"] = rej;
  if (s.methods.el && s.methods.el_ratio)
    j["coverage"] = {{"el", coverage_json(s.el_coverage)},
                     {"wald", coverage_json(s.wald_coverage)}};
  j["score_u_at_truth"] = {{"mean", number(s.u0_mean)}, {"se", number(s.u0_se)}};
  j["em_runs"] = s.fits;
  j["max_em_decrease"] = s.max_decrease;
  j["redraws"] = s.redraws;
  if (raw) {
    Json reps = Json::array();
    for (const auto& r : s.reps) {
      Json e = {{"n", r.n}, {"m", r.m}};
      if (s.methods.el)
        e.update({{"N_hat", number(r.n_el)}, {"w_hat", number(r.w_el)},
                  {"sigma2", number(r.sigma2)}, {"R_N0", number(r.r_n0)}});
      if (s.methods.no_inflation) e["N_tilde"] = number(r.n_null);
      if (s.methods.cl) e["N_HT"] = number(r.n_ht);
      if (s.methods.score) e.update({{"S", number(r.s)}, {"S_e", number(r.s_e)}});
      if (s.methods.score_cl) e["S_c"] = number(r.s_c);
      if (!r.errors.empty()) e["errors"] = r.errors;
      reps.push_back(std::move(e));
    }
    j["replications"] = std::move(reps);
  }
  return j;
}

Json to_json(const QqData& q) {
  auto arr = [](const std::vector<double>& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(number(x));
    return a;
  };
  return {{"pivotal", {{"sample", arr(q.pivotal)}, {"normal", arr(q.normal_quantiles)}}},
          {"ratio", {{"sample", arr(q.ratio)}, {"chisq1", arr(q.chisq_quantiles)}}}};
}

Json error_json(const std::string& code, const std::string& message) {
  return {{"error", {{"code", code}, {"message", message}}}};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string table_row(const ElFit& fit, const InferenceReport& r) {
  auto bracket = [](const Interval& i) {
    return "[" + fixed(i.lower, 0) + ", " + fixed(i.upper, 0) + "]";
  };
  std::string row = fixed(fit.params.N, 0) + " (" + fixed(r.se_n, 0) + ")  " + bracket(r.ci_el) +
                    "  " + bracket(r.ci_wald);
  if (fit.model.form != InflationForm::none)
    row += "  " + fixed(fit.params.w, 2) + " (" + fixed(r.se_w, 2) + ")";
  return row;
}

std::string fit_table(const ElFit& fit, const Dataset& data, const InferenceReport& r) {
  std::ostringstream out;
  out << "model    " << form_name(fit.model.form) << " " << fit.model.family.name() << "\n";
  out << "n        " << data.n() << " (ones: " << data.ones() << ")\n";
  out << "N (SE)  I_EL  I_Wald" << (fit.model.form != InflationForm::none ? "  w (SE)" : "")
      << "\n";
  out << table_row(fit, r) << "\n";
  out << "beta    ";
  for (Eigen::Index j = 0; j < fit.params.beta.size(); ++j)
    out << " " << fixed(fit.params.beta[j], 4) << " (" << fixed(r.se_beta[j], 4) << ")";
  out << "\nalpha    " << fixed(fit.params.alpha, 4) << " (" << fixed(r.se_alpha, 4) << ")\n";
  out << "loglik   " << fixed(fit.loglik, 4) << "\n";
  return out.str();
}

std::string tests_table(const std::vector<std::pair<std::string, ScoreTestResult>>& tests) {
  std::ostringstream out;
  out << pad("test", 6) << pad("statistic", 12) << "p-value\n";
  for (const auto& [name, t] : tests)
    out << pad(name, 6) << pad(fixed(t.statistic, 4), 12) << (t.valid ? fixed(t.p_value, 6) : "invalid variance")
        << "\n";
  return out.str();
}

std::string gof_table(const GofReport& r) {
  std::ostringstream out;
  out << pad("count", 10);
  for (const auto& b : r.bins) out << pad(bin_label(b), 8);
  out << "\n" << pad("observed", 10);
  for (const auto& b : r.bins) out << pad(fixed(b.observed, 0), 8);
  out << "\n" << pad("fitted", 10);
  for (const auto& b : r.bins) out << pad(fixed(b.fitted, 0), 8);
  out << "\nchi2 = " << fixed(r.chi2, 2) << " (df " << r.df << ")\n";
  for (const auto& note : r.notes) out << "note: " << note << "\n";
  return out.str();
}

std::string study_table(const ReplicationSummary& s) {
  std::ostringstream out;
  const ScenarioConfig& c = s.config;
  out << "scenario " << (c.scenario == Scenario::a ? "A" : "B") << "  N0 " << c.n0 << "  w0 "
      << c.w0 << "  reps " << c.reps << "  seed " << c.seed << "\n";
  auto est = [&](const char* name, const EstimateSummary& e) {
    out << pad(name, 18) << pad(fixed(e.mean, 1), 10) << pad(fixed(e.rmse, 2), 10)
        << e.failures << "\n";
  };
  if (s.methods.el || s.methods.no_inflation || s.methods.cl)
    out << pad("estimator", 18) << pad("mean", 10) << pad("MSE/N0", 10) << "failures\n";
  if (s.methods.el) est("EL", s.el);
  if (s.methods.no_inflation) est("EL (w = 1)", s.no_inflation);
  if (s.methods.cl) est("CL-HT", s.cl);
  auto rej = [&](const char* name, const RejectionRates& r) {
    out << pad(name, 18) << pad(fixed(100 * r.at01, 2), 10) << pad(fixed(100 * r.at05, 2), 10)
        << pad(fixed(100 * r.at10, 2), 10) << r.invalid << "\n";
  };
  if (s.methods.score || s.methods.score_cl)
    out << pad("test", 18) << pad("1%", 10) << pad("5%", 10) << pad("10%", 10) << "invalid\n";
  if (s.methods.score) {
    rej("S", s.s);
    rej("S_e", s.s_e);
  }
  if (s.methods.score_cl) rej("S_c", s.s_c);
  if (s.methods.el && s.methods.el_ratio) {
    out << pad("coverage", 18) << pad("two", 10) << pad("lower", 10) << "upper\n";
    auto cov = [&](const char* name, const Coverage& v) {
      out << pad(name, 18) << pad(fixed(100 * v.two_sided, 1), 10)
          << pad(fixed(100 * v.lower, 1), 10) << fixed(100 * v.upper, 1) << "\n";
    };
    cov("I_EL", s.el_coverage);
    cov("I_Wald", s.wald_coverage);
  }
  return out.str();
}

}  // namespace oiel
