#include <doctest.h>

#include <cmath>

#include "oiel/errors.hpp"
#include "oiel/families.hpp"
#include "oracles.hpp"

using namespace oiel;

using testing::reference_pmf;

namespace {

int upper_support(const Family& f) { return f.kind() == FamilyKind::binomial ? f.trials() : 3000; }

const Family kFamilies[] = {Family::binomial(7), Family::binomial(17), Family::poisson(),
                            Family::geometric()};

}  // namespace

TEST_CASE("masses match closed forms and sum to one") {
  for (const Family& f : kFamilies) {
    for (double eta : {-2.5, -0.3, 0.0, 0.8, 2.0}) {
      double total = 0.0;
      for (int y = 0; y <= upper_support(f); ++y) {
        const double p = f.pmf(y, eta);
        total += p;
        if (y < 30) CHECK(p == doctest::Approx(reference_pmf(f, y, eta)).epsilon(1e-12));
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(f.f0(eta) == doctest::Approx(reference_pmf(f, 0, eta)).epsilon(1e-13));
      CHECK(f.f1(eta) == doctest::Approx(reference_pmf(f, 1, eta)).epsilon(1e-12));
    }
  }
}

TEST_CASE("moments agree with direct summation") {
  for (const Family& f : kFamilies) {
    for (double eta : {-1.0, 0.4, 1.5}) {
      double m1 = 0, m2 = 0;
      for (int y = 0; y <= upper_support(f); ++y) {
        m1 += y * f.pmf(y, eta);
        m2 += double(y) * y * f.pmf(y, eta);
      }
      const Moments mo = f.moments(eta);
      CHECK(mo.mean == doctest::Approx(m1).epsilon(1e-10));
      CHECK(mo.var == doctest::Approx(m2 - m1 * m1).epsilon(1e-9));
    }
  }
}

TEST_CASE("score and curvature are derivatives of the kernel") {
  const double h = 1e-5;
  for (const Family& f : kFamilies) {
    for (double y : {0.0, 1.0, 2.5, 6.0}) {
      for (double eta : {-1.2, 0.0, 0.9}) {
        const double d1 = (f.kernel(y, eta + h) - f.kernel(y, eta - h)) / (2 * h);
        const double d2 =
            (f.kernel(y, eta + h) - 2 * f.kernel(y, eta) + f.kernel(y, eta - h)) / (h * h);
        CHECK(f.score(y, eta) == doctest::Approx(d1).epsilon(1e-7));
        CHECK(f.curvature(y, eta) == doctest::Approx(d2).epsilon(1e-4));
      }
    }
  }
}

TEST_CASE("log-mass is linear in y up to a y-only term") {
  // log f(y) - log f(y') - (y - y') theta must not depend on eta
  for (const Family& f : kFamilies) {
    const double a = f.log_pmf(3, -0.4) - f.log_pmf(1, -0.4) - (f.kernel(3, -0.4) - f.kernel(1, -0.4));
    const double b = f.log_pmf(3, 1.1) - f.log_pmf(1, 1.1) - (f.kernel(3, 1.1) - f.kernel(1, 1.1));
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
  }
}

TEST_CASE("support checks") {
  const Family b = Family::binomial(5);
  CHECK(b.in_support(5));
  CHECK_FALSE(b.in_support(6));
  CHECK_FALSE(Family::poisson().in_support(-1));
  CHECK_THROWS_AS(b.log_pmf(6, 0.0), Error);
}

TEST_CASE("families by name") {
  CHECK(family_from_name("poisson") == Family::poisson());
  CHECK(family_from_name("geometric") == Family::geometric());
  CHECK(family_from_name("binomial", 17) == Family::binomial(17));
  try {
    family_from_name("binomial");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_argument);
  }
  CHECK_THROWS_AS(family_from_name("negbin"), Error);
}

TEST_CASE("weighted ML solves the weighted score equations") {
  for (const Family& f : kFamilies) {
    const Dataset d = testing::synthetic(f, 200, f.kind() == FamilyKind::binomial ? -1.0 : 0.3,
                                         0.6, 0.0, 11);
    Eigen::VectorXd y(200), wt(200);
    for (int i = 0; i < 200; ++i) {
      y[i] = d.y()[i];
      wt[i] = 0.5 + (i % 3);
    }
    const Eigen::VectorXd beta =
        weighted_ml_step(f, d.x(), y, wt, Eigen::VectorXd::Zero(2));
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(2);
    for (int i = 0; i < 200; ++i)
      grad += wt[i] * f.score(y[i], d.x().row(i).dot(beta)) * d.x().row(i).transpose();
    CHECK(grad.norm() < 1e-6);
    // doubling every weight leaves the maximizer unchanged
    const Eigen::VectorXd twice = weighted_ml_step(f, d.x(), y, 2 * wt, Eigen::VectorXd::Zero(2));
    CHECK((twice - beta).norm() < 1e-8);
  }
}

TEST_CASE("weighted ML failure modes") {
  const Family f = Family::poisson();
  Eigen::MatrixXd x(3, 2);
  x << 1, 0.5, 1, 0.5, 1, 0.5;
  const Eigen::VectorXd y = Eigen::Vector3d(1, 2, 3);
  try {
    weighted_ml_step(f, x, y, Eigen::VectorXd::Ones(3), Eigen::VectorXd::Zero(2));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::singular_design);
  }
  // a binomial response that is 0 below x = 0 and K above separates
  Eigen::MatrixXd xs(4, 2);
  xs << 1, -2, 1, -1, 1, 1, 1, 2;
  const Eigen::VectorXd ys = Eigen::Vector4d(0, 0, 3, 3);
  try {
    weighted_ml_step(Family::binomial(3), xs, ys, Eigen::VectorXd::Ones(4),
                     Eigen::VectorXd::Zero(2));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::separation);
  }
}

TEST_CASE("covariate-vector entry points") {
  const Eigen::Vector2d x(1.0, 0.5), beta(-0.2, 0.8);
  const double eta = x.dot(beta);
  for (const Family& f : kFamilies) {
    CHECK(pmf(f, 2, x, beta) == doctest::Approx(reference_pmf(f, 2, eta)).epsilon(1e-12));
    const Moments m = cond_mean_var(f, x, beta);
    CHECK(m.mean == doctest::Approx(f.moments(eta).mean));
    CHECK(m.var == doctest::Approx(f.moments(eta).var));
  }
}
