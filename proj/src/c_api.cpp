#include "oiel.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "oiel/baselines.hpp"
#include "oiel/errors.hpp"
#include "oiel/io.hpp"
#include "oiel/report.hpp"
#include "oiel/sim.hpp"

struct oiel_dataset {
  oiel::Dataset data;
};

struct oiel_fit {
  std::shared_ptr<const oiel::Dataset> data;
  oiel::ElFit fit;
  oiel::EmConfig config;
};

namespace {

thread_local std::string last_error;

oiel_status to_status(oiel::ErrorCode code) {
  using oiel::ErrorCode;
  switch (code) {
    case ErrorCode::invalid_argument: return OIEL_E_INVALID_ARGUMENT;
    case ErrorCode::domain: return OIEL_E_DOMAIN;
    case ErrorCode::parse: return OIEL_E_PARSE;
    case ErrorCode::truncation_violation: return OIEL_E_TRUNCATION;
    case ErrorCode::singular_design: return OIEL_E_SINGULAR_DESIGN;
    case ErrorCode::separation: return OIEL_E_SEPARATION;
    case ErrorCode::infeasible_constraint: return OIEL_E_INFEASIBLE;
    case ErrorCode::degenerate_model: return OIEL_E_DEGENERATE;
    case ErrorCode::singular_information: return OIEL_E_SINGULAR_INFORMATION;
    case ErrorCode::unsupported: return OIEL_E_UNSUPPORTED;
    case ErrorCode::io: return OIEL_E_IO;
  }
  return OIEL_E_INTERNAL;
}

template <class F>
oiel_status guarded(F&& body) {
  last_error.clear();
  try {
    body();
    return OIEL_OK;
  } catch (const oiel::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown failure";
  }
  return OIEL_E_INTERNAL;
}

void require(bool ok, const char* what) {
  if (!ok) oiel::fail(oiel::ErrorCode::invalid_argument, what);
}

char* copy_out(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

oiel::EmConfig em_config(const oiel_em_options* options) {
  oiel::EmConfig c;
  if (options) {
    require(options->tol > 0.0, "tol must be positive");
    require(options->max_iter > 0, "max_iter must be positive");
    require(options->n_max_factor > 1.0, "n_max_factor must exceed 1");
    c.tol = options->tol;
    c.max_iter = options->max_iter;
    c.n_max_factor = options->n_max_factor;
  }
  return c;
}

bool format_ok(oiel_format f) { return f == OIEL_FORMAT_JSON || f == OIEL_FORMAT_TABLE; }

void check_level(double level) {
  require(level > 0.0 && level <= 0.5, "level must lie in (0, 0.5]");
}

}  // namespace

extern "C" {

const char* oiel_version(void) { return OIEL_VERSION_STRING; }

const char* oiel_last_error(void) { return last_error.c_str(); }

const char* oiel_status_name(oiel_status status) {
  switch (status) {
    case OIEL_OK: return "ok";
    case OIEL_E_INVALID_ARGUMENT: return "invalid_argument";
    case OIEL_E_DOMAIN: return "domain";
    case OIEL_E_PARSE: return "parse";
    case OIEL_E_TRUNCATION: return "truncation_violation";
    case OIEL_E_SINGULAR_DESIGN: return "singular_design";
    case OIEL_E_SEPARATION: return "separation";
    case OIEL_E_INFEASIBLE: return "infeasible_constraint";
    case OIEL_E_DEGENERATE: return "degenerate_model";
    case OIEL_E_SINGULAR_INFORMATION: return "singular_information";
    case OIEL_E_UNSUPPORTED: return "unsupported";
    case OIEL_E_IO: return "io";
    case OIEL_E_INTERNAL: return "internal";
  }
  return "unknown";
}

void oiel_string_free(char* s) { std::free(s); }

void oiel_em_options_init(oiel_em_options* options) {
  if (!options) return;
  const oiel::EmConfig c;
  options->tol = c.tol;
  options->max_iter = c.max_iter;
  options->n_max_factor = c.n_max_factor;
}

void oiel_sim_options_init(oiel_sim_options* options) {
  if (!options) return;
  const oiel::ScenarioConfig c;
  options->scenario = 'A';
  options->n0 = c.n0;
  options->w0 = c.w0;
  options->reps = c.reps;
  options->seed = c.seed;
  options->level = c.level;
  options->threads = c.threads;
  options->methods = OIEL_METHOD_EL;
  options->raw = 0;
  options->qq = 0;
}

oiel_status oiel_dataset_read_csv(const char* path, int trials, oiel_dataset** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new oiel_dataset{oiel::read_dataset(path, trials)};
  });
}

oiel_status oiel_dataset_from_arrays(const int* counts, const double* covariates, size_t n,
                                     size_t p, int trials, oiel_dataset** out) {
  return guarded([&] {
    require(counts && out && (covariates || p == 0), "null argument");
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < p; ++j)
        x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = covariates[i * p + j];
    *out = new oiel_dataset{
        oiel::Dataset::from_covariates(x, std::vector<int>(counts, counts + n), trials)};
  });
}

oiel_status oiel_dataset_write_csv(const oiel_dataset* data, const char* path) {
  return guarded([&] {
    require(data && path, "null argument");
    oiel::write_dataset(path, data->data);
  });
}

oiel_status oiel_dataset_info(const oiel_dataset* data, size_t* n, size_t* ones,
                              size_t* covariates) {
  return guarded([&] {
    require(data != nullptr, "null dataset");
    if (n) *n = data->data.n();
    if (ones) *ones = data->data.ones();
    if (covariates) *covariates = static_cast<size_t>(data->data.dim() - 1);
  });
}

void oiel_dataset_free(oiel_dataset* data) { delete data; }

oiel_status oiel_fit_create(const oiel_dataset* data, const char* form, const char* family,
                            const oiel_em_options* options, oiel_fit** out) {
  return guarded([&] {
    require(data && form && family && out, "null argument");
    const oiel::Model model{oiel::family_from_name(family, data->data.trials()),
                            oiel::form_from_name(form)};
    auto handle = std::make_unique<oiel_fit>();
    handle->data = std::make_shared<const oiel::Dataset>(data->data);
    handle->config = em_config(options);
    handle->fit = oiel::fit(model, *handle->data, handle->config);
    *out = handle.release();
  });
}

oiel_status oiel_fit_estimates(const oiel_fit* fit, double* n_hat, double* w_hat,
                               double* alpha_hat, double* loglik) {
  return guarded([&] {
    require(fit != nullptr, "null fit");
    if (n_hat) *n_hat = fit->fit.params.N;
    if (w_hat) *w_hat = fit->fit.params.w;
    if (alpha_hat) *alpha_hat = fit->fit.params.alpha;
    if (loglik) *loglik = fit->fit.loglik;
  });
}

oiel_status oiel_fit_beta(const oiel_fit* fit, double* beta, size_t len, size_t* dim) {
  return guarded([&] {
    require(fit != nullptr, "null fit");
    const auto& b = fit->fit.params.beta;
    const auto d = static_cast<size_t>(b.size());
    if (dim) *dim = d;
    require(beta || len == 0, "null beta buffer");
    for (size_t j = 0; j < std::min(len, d); ++j) beta[j] = b[static_cast<Eigen::Index>(j)];
  });
}

oiel_status oiel_el_ratio(const oiel_fit* fit, double n, double* value) {
  return guarded([&] {
    require(fit && value, "null argument");
    *value = oiel::el_ratio(*fit->data, n, fit->fit, fit->config).value;
  });
}

void oiel_fit_free(oiel_fit* fit) { delete fit; }

oiel_status oiel_fit_report(const oiel_fit* fit, double level, oiel_format format, char** out) {
  return guarded([&] {
    require(fit && out && format_ok(format), "invalid argument");
    check_level(level);
    const oiel::InferenceReport r = oiel::infer(*fit->data, fit->fit, level, fit->config);
    if (format == OIEL_FORMAT_TABLE) {
      *out = copy_out(oiel::fit_table(fit->fit, *fit->data, r));
      return;
    }
    oiel::Json j = {{"provenance", oiel::provenance()}};
    j["fit"] = oiel::to_json(fit->fit, *fit->data);
    j["inference"] = oiel::to_json(r);
    *out = copy_out(oiel::dump(j));
  });
}

oiel_status oiel_ci_report(const oiel_fit* fit, double level, oiel_format format, char** out) {
  return guarded([&] {
    require(fit && out && format_ok(format), "invalid argument");
    check_level(level);
    const oiel::InferenceReport r = oiel::infer(*fit->data, fit->fit, level, fit->config);
    if (format == OIEL_FORMAT_TABLE) {
      *out = copy_out(oiel::table_row(fit->fit, r) + "\n");
      return;
    }
    oiel::Json j = {{"provenance", oiel::provenance()},
                    {"model", oiel::to_json(fit->fit.model)},
                    {"level", level},
                    {"N_hat", fit->fit.params.N},
                    {"se_N", r.se_n},
                    {"ci_el", oiel::to_json(r.ci_el)},
                    {"ci_wald", oiel::to_json(r.ci_wald)}};
    *out = copy_out(oiel::dump(j));
  });
}

oiel_status oiel_gof_report(const oiel_fit* fit, oiel_format format, char** out) {
  return guarded([&] {
    require(fit && out && format_ok(format), "invalid argument");
    const oiel::GofReport g = oiel::gof(fit->fit, *fit->data);
    if (format == OIEL_FORMAT_TABLE) {
      *out = copy_out(oiel::gof_table(g));
      return;
    }
    oiel::Json j = {{"provenance", oiel::provenance()},
                    {"model", oiel::to_json(fit->fit.model)},
                    {"gof", oiel::to_json(g)}};
    *out = copy_out(oiel::dump(j));
  });
}

oiel_status oiel_test_report(const oiel_dataset* data, const char* which, const char* family,
                             const oiel_em_options* options, oiel_format format, char** out) {
  return guarded([&] {
    require(data && which && family && out && format_ok(format), "invalid argument");
    const std::string w = which;
    require(w == "s" || w == "se" || w == "sc" || w == "all", "which must be s, se, sc or all");
    const oiel::Family fam = oiel::family_from_name(family, data->data.trials());
    std::vector<std::pair<std::string, oiel::ScoreTestResult>> results;
    if (w != "sc") {
      oiel::ScoreTests t = oiel::score_tests(fam, data->data, em_config(options));
      if (w == "s" || w == "all") results.emplace_back("S", std::move(t.s));
      if (w == "se" || w == "all") results.emplace_back("S_e", std::move(t.s_e));
    }
    if (w == "sc" || w == "all")
      results.emplace_back("S_c", oiel::score_test_cl(fam, data->data));
    if (format == OIEL_FORMAT_TABLE) {
      *out = copy_out(oiel::tests_table(results));
      return;
    }
    oiel::Json tests = oiel::Json::array();
    for (const auto& [name, t] : results) tests.push_back(oiel::to_json(t, name));
    oiel::Json j = {{"provenance", oiel::provenance()},
                    {"family", fam.name()},
                    {"n", data->data.n()},
                    {"m", data->data.ones()},
                    {"tests", tests}};
    *out = copy_out(oiel::dump(j));
  });
}

oiel_status oiel_simulate(const oiel_sim_options* options, oiel_format format, char** out) {
  return guarded([&] {
    require(options && out && format_ok(format), "invalid argument");
    require(options->scenario == 'A' || options->scenario == 'B' || options->scenario == 'a' ||
                options->scenario == 'b',
            "scenario must be A or B");
    require(options->n0 >= 1, "N0 must be >= 1");
    require(options->reps >= 1, "reps must be >= 1");
    require(options->w0 > 0.0 && options->w0 <= 1.0, "w0 must lie in (0, 1]");
    check_level(options->level);
    require(options->methods != 0, "no methods selected");
    oiel::ScenarioConfig c;
    c.scenario = (options->scenario == 'A' || options->scenario == 'a') ? oiel::Scenario::a
                                                                        : oiel::Scenario::b;
    c.n0 = options->n0;
    c.w0 = options->w0;
    c.reps = options->reps;
    c.seed = options->seed;
    c.level = options->level;
    c.threads = options->threads;
    oiel::MethodSet m;
    m.el = options->methods & OIEL_METHOD_EL;
    m.el_ratio = m.el;
    m.no_inflation = options->methods & OIEL_METHOD_NO_INFLATION;
    m.cl = options->methods & OIEL_METHOD_CL;
    m.score = options->methods & OIEL_METHOD_SCORE;
    m.score_cl = options->methods & OIEL_METHOD_SCORE_CL;
    const oiel::ReplicationSummary s = oiel::run_study(c, m);
    if (format == OIEL_FORMAT_TABLE) {
      *out = copy_out(oiel::study_table(s));
      return;
    }
    oiel::Json j = {{"provenance", oiel::provenance()}};
    j["study"] = oiel::to_json(s, options->raw != 0);
    if (options->qq && m.el) j["qq"] = oiel::to_json(oiel::qq_data(s));
    *out = copy_out(oiel::dump(j));
  });
}

}  // extern "C"
