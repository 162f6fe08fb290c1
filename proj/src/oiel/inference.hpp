#pragma once

#include <functional>
#include <optional>

#include "oiel/em.hpp"

namespace oiel {

struct Interval {
  double lower;
  double upper;  // +inf when the EL ratio never crosses the threshold
};

// (1/N) sum_i J(x_i) / (1 - c_i), where 1 - c_i is the fitted capture
// probability of unit i (c_i = w f(0) under ZTOI, f(0) otherwise).
double plug_in_expectation(const std::function<double(const Eigen::VectorXd&)>& J,
                           const ElFit& fit, const Dataset& data);

// Per-unit plug-in weights 1 / {N (1 - c_i)}.
Eigen::VectorXd plug_in_weights(const ElFit& fit, const Dataset& data);

// Plug-in estimates of the blocks of the asymptotic information of the
// ZTOI log-EL (canonical binomial/Poisson families only).
struct VBlocks {
  double alpha = 0.0;
  double phi = 0.0;
  double v11 = 0.0, v14 = 0.0;
  Eigen::MatrixXd v22;
  Eigen::VectorXd v23, v24, v25;
  double v33 = 0.0, v34 = 0.0, v35 = 0.0;
  double v44 = 0.0, v45 = 0.0, v55 = 0.0;
};

VBlocks v_blocks(const Family& family, const Dataset& data, const Eigen::VectorXd& beta,
                 double w, double alpha, double N);

// W over ((N - N0)/N0, beta, w, alpha), with the multiplier block absorbed.
Eigen::MatrixXd assemble_w(const VBlocks& v);
// W with the w row and column removed: the null (w = 1) information.
Eigen::MatrixXd assemble_w_null(const VBlocks& v);

// Sandwich formula for the limiting variance of sqrt(N0) (N_hat / N0 - 1).
double sigma2_from_blocks(const VBlocks& v, bool with_w);

double sigma2_ztoi(const ElFit& fit, const Dataset& data);
// OIZT variance: there is no analytic block form, so it is read from the
// observed information of the profile log-EL.
double sigma2_oizt(const ElFit& fit, const Dataset& data);

// Negative Hessian of the profile log-EL in (N, beta, w, alpha) by central
// differences. The w coordinate is dropped when w is pinned (NONE form or
// w_hat = 1).
Eigen::MatrixXd observed_information(const ElFit& fit, const Dataset& data);

struct InferenceReport {
  double sigma2 = 0.0;
  double se_n = 0.0;
  Eigen::VectorXd se_beta;
  double se_w = 0.0;  // NaN when w is pinned
  double se_alpha = 0.0;
  std::string variance_method;
  bool variance_floored = false;
  Interval ci_el{0.0, 0.0};
  Interval ci_wald{0.0, 0.0};
  double level = 0.05;
};

struct ElRatio {
  double value;
  bool converged;
  int runs;
  double max_decrease;
};

// R(N) = 2 {max log-EL - max log-EL at fixed N}, floored at 0. The
// fixed-N EM starts from the global fit.
ElRatio el_ratio(const Dataset& data, double N, const ElFit& global,
                 const EmConfig& config = {});

Interval ci_el(const Dataset& data, const ElFit& fit, double level,
               const EmConfig& config = {});
Interval ci_wald(const ElFit& fit, double sigma2, double level, std::size_t n);

InferenceReport infer(const Dataset& data, const ElFit& fit, double level,
                      const EmConfig& config = {});

// U(N, beta) = N - sum_{y_i = 1} 1 / f(1, x_i; beta)
double score_u_ztoi(const Family& family, const Dataset& data, double N,
                    const Eigen::VectorXd& beta);
// U_e(beta) = n - sum_{y_i = 1} {1 - f(0, x_i; beta)} / f(1, x_i; beta)
double score_u_oizt(const Family& family, const Dataset& data, const Eigen::VectorXd& beta);

struct ScoreTestResult {
  double u = 0.0;
  double statistic = 0.0;
  double sigma_u2 = 0.0;
  double p_value = 0.0;  // Phi(statistic): the left tail rejects
  bool valid = false;    // false when the variance estimate is not positive
  std::optional<ElFit> null_fit;
};

struct ScoreTests {
  ScoreTestResult s;    // ZTOI score test
  ScoreTestResult s_e;  // OIZT score test
};

// Both EL score tests of H0: w = 1 share the no-inflation fit.
ScoreTests score_tests(const Family& family, const Dataset& data, const EmConfig& config = {});
ScoreTests score_tests(const Dataset& data, const ElFit& null_fit);

ScoreTestResult score_test(InflationForm form, const Family& family, const Dataset& data,
                           const EmConfig& config = {});

}  // namespace oiel
