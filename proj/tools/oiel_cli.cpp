// Command-line front end. Talks to the library only through oiel.h.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "oiel.h"

namespace {

struct Failure {
  std::string code;
  std::string message;
  int exit_code;
};

void check(oiel_status s) {
  if (s != OIEL_OK) throw Failure{oiel_status_name(s), oiel_last_error(), static_cast<int>(s)};
}

// Owns a char* handed out by the library.
struct Text {
  char* p = nullptr;
  ~Text() { oiel_string_free(p); }
};

struct Dataset {
  oiel_dataset* p = nullptr;
  ~Dataset() { oiel_dataset_free(p); }
};

struct Fit {
  oiel_fit* p = nullptr;
  ~Fit() { oiel_fit_free(p); }
};

struct Common {
  std::string data;
  std::string model = "ztoi";
  std::string family = "poisson";
  int k = 0;
  double level = 0.05;
  std::string format = "json";
  double tol = 0.0;
  int max_iter = 0;
};

oiel_format format_of(const Common& c) {
  return c.format == "table" ? OIEL_FORMAT_TABLE : OIEL_FORMAT_JSON;
}

oiel_em_options em_options(const Common& c) {
  oiel_em_options o;
  oiel_em_options_init(&o);
  if (c.tol > 0.0) o.tol = c.tol;
  if (c.max_iter > 0) o.max_iter = c.max_iter;
  return o;
}

void add_data(CLI::App* cmd, Common& c) {
  cmd->add_option("data", c.data, "CSV file: header row, count column `y`, covariates")
      ->required();
  cmd->add_option("--k", c.k, "number of capture occasions K (binomial family)");
  cmd->add_option("--format", c.format, "output format")
      ->check(CLI::IsMember({"json", "table"}));
  cmd->add_option("--tol", c.tol, "EM stopping tolerance on the log-EL gain");
  cmd->add_option("--max-iter", c.max_iter, "EM iteration cap");
}

void add_family(CLI::App* cmd, Common& c) {
  cmd->add_option("--family", c.family, "base count family")
      ->check(CLI::IsMember({"binomial", "poisson", "geometric"}));
}

void add_model(CLI::App* cmd, Common& c) {
  cmd->add_option("--model", c.model, "inflation form")
      ->check(CLI::IsMember({"ztoi", "oizt", "none"}));
  add_family(cmd, c);
}

void print(const Text& t) { std::fputs(t.p, stdout); }

void load_and_fit(const Common& c, Dataset& d, Fit& f) {
  check(oiel_dataset_read_csv(c.data.c_str(), c.k, &d.p));
  const oiel_em_options o = em_options(c);
  check(oiel_fit_create(d.p, c.model.c_str(), c.family.c_str(), &o, &f.p));
}

unsigned parse_methods(const std::string& list) {
  unsigned bits = 0;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "el") bits |= OIEL_METHOD_EL;
    else if (item == "null") bits |= OIEL_METHOD_NO_INFLATION;
    else if (item == "cl") bits |= OIEL_METHOD_CL;
    else if (item == "score") bits |= OIEL_METHOD_SCORE;
    else if (item == "score_cl") bits |= OIEL_METHOD_SCORE_CL;
    else if (item == "all")
      bits |= OIEL_METHOD_EL | OIEL_METHOD_NO_INFLATION | OIEL_METHOD_CL | OIEL_METHOD_SCORE |
              OIEL_METHOD_SCORE_CL;
    else
      throw Failure{"invalid_argument", "unknown method `" + item + "`",
                    static_cast<int>(OIEL_E_INVALID_ARGUMENT)};
  }
  return bits;
}

void emit_error(const Failure& f) {
  nlohmann::ordered_json j = {{"error", {{"code", f.code}, {"message", f.message}}}};
  std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Abundance estimation from one-inflated capture-recapture counts"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(oiel_version()));

  Common c;
  std::string which = "all";

  auto* fit = app.add_subcommand("fit", "fit the EL model; report estimates, SEs and intervals");
  add_data(fit, c);
  add_model(fit, c);
  fit->add_option("--level", c.level, "interval level a (coverage 1 - a)");

  auto* test = app.add_subcommand("test", "score tests of H0: no one-inflation");
  add_data(test, c);
  add_family(test, c);
  test->add_option("--which", which, "which statistic")
      ->check(CLI::IsMember({"s", "se", "sc", "all"}));

  auto* ci = app.add_subcommand("ci", "EL-ratio and Wald intervals for N");
  add_data(ci, c);
  add_model(ci, c);
  ci->add_option("--level", c.level, "interval level a (coverage 1 - a)");

  auto* gof = app.add_subcommand("gof", "observed against fitted count frequencies");
  add_data(gof, c);
  add_model(gof, c);

  oiel_sim_options so;
  oiel_sim_options_init(&so);
  std::string scenario = "A", methods = "el";
  bool raw = false, qq = false;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo study under scenario A or B");
  sim->add_option("--scenario", scenario, "generating scenario")
      ->check(CLI::IsMember({"A", "B", "a", "b"}));
  sim->add_option("--n0", so.n0, "population size");
  sim->add_option("--w0", so.w0, "true w");
  sim->add_option("--reps", so.reps, "replications");
  sim->add_option("--seed", so.seed, "master seed");
  sim->add_option("--level", so.level, "test and interval level");
  sim->add_option("--threads", so.threads, "worker threads (0: hardware)");
  sim->add_option("--methods", methods, "comma list of el, null, cl, score, score_cl, all");
  sim->add_flag("--raw", raw, "include per-replication records");
  sim->add_flag("--qq", qq, "include QQ plot columns");
  sim->add_option("--format", c.format, "output format")->check(CLI::IsMember({"json", "table"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error({"usage", e.what(), e.get_exit_code()});
    return e.get_exit_code() != 0 ? e.get_exit_code() : 2;
  }

  try {
    Text out;
    if (fit->parsed() || ci->parsed() || gof->parsed()) {
      if (!(c.level > 0.0 && c.level <= 0.5))
        throw Failure{"invalid_argument", "--level must lie in (0, 0.5]",
                      static_cast<int>(OIEL_E_INVALID_ARGUMENT)};
      Dataset d;
      Fit f;
      load_and_fit(c, d, f);
      if (fit->parsed()) check(oiel_fit_report(f.p, c.level, format_of(c), &out.p));
      if (ci->parsed()) check(oiel_ci_report(f.p, c.level, format_of(c), &out.p));
      if (gof->parsed()) check(oiel_gof_report(f.p, format_of(c), &out.p));
    } else if (test->parsed()) {
      Dataset d;
      check(oiel_dataset_read_csv(c.data.c_str(), c.k, &d.p));
      const oiel_em_options o = em_options(c);
      check(oiel_test_report(d.p, which.c_str(), c.family.c_str(), &o, format_of(c), &out.p));
    } else if (sim->parsed()) {
      so.scenario = scenario[0];
      so.methods = parse_methods(methods);
      so.raw = raw;
      so.qq = qq;
      check(oiel_simulate(&so, format_of(c), &out.p));
    }
    print(out);
  } catch (const Failure& f) {
    emit_error(f);
    return f.exit_code != 0 ? f.exit_code : 1;
  }
  return 0;
}
