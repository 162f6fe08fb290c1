#pragma once

// Count families f(y, x; beta) used as the base capture-count model.
//
// Every family here has a log-mass that is linear in y once the y-only
// normalizing term is dropped: log f(y) = y * theta(eta) - b(eta) + c(y),
// with eta = beta'x. The weighted maximum-likelihood step relies on that
// form, which is what lets the EM merge rows sharing a covariate vector and
// feed fractional (imputed) responses.

#include <Eigen/Dense>
#include <string>
#include <string_view>

namespace oiel {

enum class FamilyKind { binomial, poisson, geometric };

struct Moments {
  double mean;
  double var;
};

class Family {
 public:
  Family() : kind_(FamilyKind::poisson), trials_(0) {}
  static Family binomial(int trials);
  static Family poisson() { return Family(FamilyKind::poisson, 0); }
  static Family geometric() { return Family(FamilyKind::geometric, 0); }

  FamilyKind kind() const noexcept { return kind_; }
  int trials() const noexcept { return trials_; }
  std::string name() const;

  bool in_support(int y) const noexcept;
  void check_support(int y) const;

  double log_pmf(int y, double eta) const;
  double pmf(int y, double eta) const;
  double log_f0(double eta) const;
  double f0(double eta) const;
  double f1(double eta) const;
  Moments moments(double eta) const;

  // y * theta(eta) - b(eta); accepts real y.
  double kernel(double y, double eta) const;
  // first and second derivative of kernel in eta
  double score(double y, double eta) const;
  double curvature(double y, double eta) const;

  friend bool operator==(const Family&, const Family&) = default;

 private:
  Family(FamilyKind kind, int trials) : kind_(kind), trials_(trials) {}

  FamilyKind kind_;
  int trials_;
};

// "binomial" (needs trials = K), "poisson" or "geometric"
Family family_from_name(std::string_view name, int trials = 0);

double pmf(const Family& family, int y, const Eigen::VectorXd& x,
           const Eigen::VectorXd& beta);

// (e_f, v_f): conditional mean and variance of Y given x.
Moments cond_mean_var(const Family& family, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& beta);

struct MlOptions {
  int max_iter = 100;
  double rel_tol = 1e-10;
  double coef_bound = 30.0;
};

// sum_i weight_i * kernel(y_i, x_i'beta)
double weighted_loglik(const Family& family, const Eigen::MatrixXd& x,
                       const Eigen::VectorXd& y, const Eigen::VectorXd& weight,
                       const Eigen::VectorXd& beta);

// Maximizes the weighted log-likelihood by Newton iterations with step
// halving, starting at beta_init. For the binomial and Poisson families the
// Newton step coincides with IRLS; for the geometric family it uses the
// observed curvature. The result never scores below beta_init.
//
// Throws ErrorCode::singular_design when the positively weighted rows do not
// determine beta, and ErrorCode::separation when a coefficient leaves the
// box |beta_j| <= coef_bound.
Eigen::VectorXd weighted_ml_step(const Family& family, const Eigen::MatrixXd& x,
                                 const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& weight,
                                 const Eigen::VectorXd& beta_init,
                                 const MlOptions& options = {});

}  // namespace oiel
