#pragma once

// Conditional-likelihood (CL) comparators: the fit of the zero-truncated
// model given Y > 0, the Horvitz-Thompson-type abundance estimator built on
// it, and the CL score test of H0: w = 1.

#include "oiel/inference.hpp"

namespace oiel {

struct ClConfig {
  double tol = 1e-10;
  int max_iter = 20000;
  // pin w = 1 (plain zero-truncated fit)
  bool pin_w = false;
  MlOptions ml;
};

struct ClFit {
  Model model;
  Eigen::VectorXd beta;
  double w = 1.0;
  double cond_loglik = 0.0;
  double n_ht = 0.0;
  bool converged = false;
  int iterations = 0;
};

// log pr(Y = y | x, Y > 0) under the one-inflated form.
double cond_log_pmf(InflationForm form, const Family& family, int y, double eta, double w);
double cond_loglik(InflationForm form, const Family& family, const Dataset& data,
                   const Eigen::VectorXd& beta, double w);

// Weighted zero-truncated maximum likelihood by Newton steps with halving.
Eigen::VectorXd zero_truncated_ml(const Family& family, const Eigen::MatrixXd& x,
                                  const Eigen::VectorXd& y, const Eigen::VectorXd& weight,
                                  const Eigen::VectorXd& beta_init, const MlOptions& ml = {});

ClFit cl_fit(const Family& family, const Dataset& data,
             InflationForm form = InflationForm::oizt, const ClConfig& config = {});

// sum_i 1 / {1 - c_i}, with c_i the fitted zero mass
double horvitz_thompson(const Model& model, const Dataset& data, const Eigen::VectorXd& beta,
                        double w);

// S_c = U_e(beta_c) / sqrt(sandwich variance of U_e at the w = 1 fit). sigma_u2
// is that variance divided by N_HT.
ScoreTestResult score_test_cl(const Family& family, const Dataset& data,
                              const ClConfig& config = {});

ElFit no_inflation_el_fit(const Family& family, const Dataset& data, const EmConfig& config = {});

}  // namespace oiel
