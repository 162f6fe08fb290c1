#include "oiel/families.hpp"

#include <cmath>

#include "oiel/errors.hpp"

namespace oiel {
namespace {

double softplus(double eta) {
  return eta > 30.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

double logistic(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

}  // namespace

Family Family::binomial(int trials) {
  if (trials < 2) fail(ErrorCode::invalid_argument, "binomial family needs K >= 2 occasions");
  return Family(FamilyKind::binomial, trials);
}

Family family_from_name(std::string_view name, int trials) {
  if (name == "binomial") {
    if (trials < 1) fail(ErrorCode::invalid_argument, "binomial family needs the number of occasions K");
    return Family::binomial(trials);
  }
  if (name == "poisson") return Family::poisson();
  if (name == "geometric") return Family::geometric();
  fail(ErrorCode::invalid_argument, "unknown family `" + std::string(name) + "`");
}

std::string Family::name() const {
  switch (kind_) {
    case FamilyKind::binomial: return "binomial";
    case FamilyKind::poisson: return "poisson";
    case FamilyKind::geometric: return "geometric";
  }
  return "unknown";
}

bool Family::in_support(int y) const noexcept {
  if (y < 0) return false;
  return kind_ != FamilyKind::binomial || y <= trials_;
}

void Family::check_support(int y) const {
  if (!in_support(y))
    fail(ErrorCode::domain, "count " + std::to_string(y) + " outside the support of the " +
                                name() + " family");
}

double Family::kernel(double y, double eta) const {
  switch (kind_) {
    case FamilyKind::binomial: return y * eta - trials_ * softplus(eta);
    case FamilyKind::poisson: return y * eta - std::exp(eta);
    case FamilyKind::geometric: return y * eta - (y + 1.0) * softplus(eta);
  }
  return 0.0;
}

double Family::score(double y, double eta) const {
  switch (kind_) {
    case FamilyKind::binomial: return y - trials_ * logistic(eta);
    case FamilyKind::poisson: return y - std::exp(eta);
    case FamilyKind::geometric: return y - (y + 1.0) * logistic(eta);
  }
  return 0.0;
}

double Family::curvature(double y, double eta) const {
  switch (kind_) {
    case FamilyKind::binomial: {
      const double g = logistic(eta);
      return -trials_ * g * (1.0 - g);
    }
    case FamilyKind::poisson: return -std::exp(eta);
    case FamilyKind::geometric: {
      const double g = logistic(eta);
      return -(y + 1.0) * g * (1.0 - g);
    }
  }
  return 0.0;
}

double Family::log_pmf(int y, double eta) const {
  check_support(y);
  const double k = kernel(y, eta);
  switch (kind_) {
    case FamilyKind::binomial:
      return k + std::lgamma(trials_ + 1.0) - std::lgamma(y + 1.0) -
             std::lgamma(trials_ - y + 1.0);
    case FamilyKind::poisson: return k - std::lgamma(y + 1.0);
    case FamilyKind::geometric: return k;
  }
  return k;
}

double Family::pmf(int y, double eta) const { return std::exp(log_pmf(y, eta)); }

double Family::log_f0(double eta) const {
  switch (kind_) {
    case FamilyKind::binomial: return -trials_ * softplus(eta);
    case FamilyKind::poisson: return -std::exp(eta);
    case FamilyKind::geometric: return -softplus(eta);
  }
  return 0.0;
}

double Family::f0(double eta) const { return std::exp(log_f0(eta)); }

double Family::f1(double eta) const { return pmf(1, eta); }

Moments Family::moments(double eta) const {
  switch (kind_) {
    case FamilyKind::binomial: {
      const double g = logistic(eta);
      return {trials_ * g, trials_ * g * (1.0 - g)};
    }
    case FamilyKind::poisson: {
      const double lambda = std::exp(eta);
      return {lambda, lambda};
    }
    case FamilyKind::geometric: {
      const double mu = std::exp(eta);
      return {mu, mu * (1.0 + mu)};
    }
  }
  return {0.0, 0.0};
}

double pmf(const Family& family, int y, const Eigen::VectorXd& x,
           const Eigen::VectorXd& beta) {
  if (x.size() != beta.size())
    fail(ErrorCode::invalid_argument, "covariate and coefficient dimensions differ");
  return family.pmf(y, x.dot(beta));
}

Moments cond_mean_var(const Family& family, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& beta) {
  if (x.size() != beta.size())
    fail(ErrorCode::invalid_argument, "covariate and coefficient dimensions differ");
  return family.moments(x.dot(beta));
}

double weighted_loglik(const Family& family, const Eigen::MatrixXd& x,
                       const Eigen::VectorXd& y, const Eigen::VectorXd& weight,
                       const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = x * beta;
  double total = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    if (weight[i] > 0.0) total += weight[i] * family.kernel(y[i], eta[i]);
  return total;
}

Eigen::VectorXd weighted_ml_step(const Family& family, const Eigen::MatrixXd& x,
                                 const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& weight,
                                 const Eigen::VectorXd& beta_init,
                                 const MlOptions& options) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  if (y.size() != n || weight.size() != n || beta_init.size() != d)
    fail(ErrorCode::invalid_argument, "weighted_ml_step: dimension mismatch");
  if ((weight.array() < 0.0).any() || !(weight.sum() > 0.0))
    fail(ErrorCode::invalid_argument, "weighted_ml_step: weights must be >= 0 and not all zero");

  {
    Eigen::MatrixXd scaled = weight.cwiseSqrt().asDiagonal() * x;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
    qr.setThreshold(1e-10);
    if (qr.rank() < d)
      fail(ErrorCode::singular_design, "weighted_ml_step: weighted design is rank deficient");
  }

  Eigen::VectorXd beta = beta_init;
  double obj = weighted_loglik(family, x, y, weight, beta);
  const double obj_init = obj;
  Eigen::VectorXd grad(d);
  Eigen::MatrixXd info(d, d);
  Eigen::VectorXd eta(n);

  for (int it = 0; it < options.max_iter; ++it) {
    eta.noalias() = x * beta;
    grad.setZero();
    info.setZero();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (weight[i] <= 0.0) continue;
      const auto row = x.row(i);
      grad.noalias() += (weight[i] * family.score(y[i], eta[i])) * row.transpose();
      info.noalias() -= (weight[i] * family.curvature(y[i], eta[i])) * row.transpose() * row;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    const Eigen::VectorXd pivots = ldlt.vectorD();
    if (ldlt.info() != Eigen::Success || pivots.minCoeff() <= 1e-12 * std::max(1.0, pivots.maxCoeff()))
      // the design has full rank, so the curvature itself has vanished
      fail(ErrorCode::separation, "weighted_ml_step: information vanishes (possible separation)");
    const Eigen::VectorXd step = ldlt.solve(grad);
    const double decrement = grad.dot(step);
    if (decrement <= 1e-20 * (1.0 + std::abs(obj))) break;

    double t = 1.0;
    Eigen::VectorXd candidate = beta + step;
    double obj_new = weighted_loglik(family, x, y, weight, candidate);
    int halvings = 0;
    while (!(obj_new >= obj - 1e-13 * (1.0 + std::abs(obj))) && halvings < 40) {
      t *= 0.5;
      candidate = beta + t * step;
      obj_new = weighted_loglik(family, x, y, weight, candidate);
      ++halvings;
    }
    if (!(obj_new >= obj - 1e-13 * (1.0 + std::abs(obj)))) break;
    const double rel = std::abs(obj_new - obj) / (1.0 + std::abs(obj));
    beta = candidate;
    obj = obj_new;
    if (beta.cwiseAbs().maxCoeff() > options.coef_bound)
      fail(ErrorCode::separation, "weighted_ml_step: coefficients diverge (possible separation)");
    if (rel < options.rel_tol && decrement < 1e-14 * (1.0 + std::abs(obj))) break;
  }
  if (obj < obj_init) return beta_init;
  return beta;
}

}  // namespace oiel
