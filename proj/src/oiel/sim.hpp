#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <cstddef>
#include <vector>

#include "oiel/em.hpp"

namespace oiel {

enum class Scenario { a, b };

struct ScenarioConfig {
  Scenario scenario = Scenario::a;
  int n0 = 500;
  double w0 = 1.0;
  int reps = 1000;
  std::uint64_t seed = 1;
  double level = 0.05;
  // 0 picks std::thread::hardware_concurrency()
  int threads = 0;
};

// Poisson regression on (1, X) with X ~ N(18, variance 5).
inline constexpr double kCovariateMean = 18.0;
inline constexpr double kCovariateVariance = 5.0;

Eigen::VectorXd true_beta(Scenario scenario);
InflationForm scenario_form(Scenario scenario);

// Random stream for one replication, derived from the master seed by
// counter-based splitting so it does not depend on scheduling.
std::mt19937_64 replication_stream(std::uint64_t seed, std::uint64_t rep);

struct Generated {
  Dataset data;
  int redraws = 0;  // populations with nobody captured that were redrawn
};

Generated generate(const ScenarioConfig& config, std::mt19937_64& rng);

struct MethodSet {
  bool el = true;            // EL fit under the scenario's inflation form
  bool el_ratio = true;      // R(N0) and the Wald variance for coverage
  bool no_inflation = false; // EL fit with w pinned at 1
  bool cl = false;           // CL fit and its Horvitz-Thompson estimate
  bool score = false;        // S and S_e on the no-inflation fit
  bool score_cl = false;     // S_c
};

// Everything measured on one replication. NaN marks a quantity that was not
// requested or whose method failed.
struct Replication {
  std::size_t n = 0;
  std::size_t m = 0;
  int redraws = 0;
  double n_el = 0.0, w_el = 0.0, sigma2 = 0.0, r_n0 = 0.0;
  bool el_ok = false, el_converged = false, ratio_ok = false, sigma2_ok = false;
  double n_null = 0.0, n_ht = 0.0;
  bool null_ok = false, cl_ok = false;
  double s = 0.0, s_e = 0.0, s_c = 0.0;
  bool s_ok = false, s_e_ok = false, s_c_ok = false;
  double u0 = 0.0;  // U(N0, beta0) / N0
  int fits = 0;     // EM runs behind this replication
  double max_decrease = 0.0;
  std::vector<std::string> errors;
};

Replication run_replication(const ScenarioConfig& config, const MethodSet& methods,
                            std::uint64_t rep);

struct EstimateSummary {
  double mean = 0.0;
  double rmse = 0.0;  // MSE / N0
  int count = 0;
  int failures = 0;
};

struct Coverage {
  double two_sided = 0.0;
  double lower = 0.0;  // [L, inf) at one-sided level a
  double upper = 0.0;  // [n, U]
  int count = 0;
};

struct RejectionRates {
  // left-tail rejections at 1%, 5% and 10%
  double at01 = 0.0, at05 = 0.0, at10 = 0.0;
  int count = 0;
  int invalid = 0;
};

struct ReplicationSummary {
  ScenarioConfig config;
  MethodSet methods;
  EstimateSummary el, no_inflation, cl;
  RejectionRates s, s_e, s_c;
  Coverage el_coverage, wald_coverage;
  double u0_mean = 0.0, u0_se = 0.0;
  long fits = 0;
  double max_decrease = 0.0;
  int redraws = 0;
  std::vector<Replication> reps;
};

ReplicationSummary run_study(const ScenarioConfig& config, const MethodSet& methods);

struct QqData {
  std::vector<double> pivotal, normal_quantiles;
  std::vector<double> ratio, chisq_quantiles;
};

// Sorted pivotal (N_hat - N0) / sqrt(N_hat sigma2_hat) and R(N0) against
// plotting-position quantiles (i - 1/2) / k of N(0, 1) and chi-square(1).
QqData qq_data(const ReplicationSummary& summary);
QqData qq_data(const ScenarioConfig& config);

// Least-squares slope of y on x, with intercept.
double ls_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace oiel
