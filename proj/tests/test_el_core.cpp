#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oiel/el_core.hpp"
#include "oiel/errors.hpp"
#include "oiel/numerics.hpp"
#include "support.hpp"

using namespace oiel;

namespace {

double multiplier_equation(const std::vector<double>& c, double alpha, double xi) {
  double s = 0.0;
  for (double ci : c) s += (ci - alpha) / (1.0 + xi * (ci - alpha));
  return s;
}

// plain bisection on the interval where every 1 + xi d_i stays positive
double bisect_xi(const std::vector<double>& c, double alpha) {
  const double dmax = *std::max_element(c.begin(), c.end()) - alpha;
  const double dmin = *std::min_element(c.begin(), c.end()) - alpha;
  double lo = -1.0 / dmax, hi = -1.0 / dmin;
  const double n = static_cast<double>(c.size());
  lo += (hi - lo) * 1e-15 / n;
  hi -= (hi - lo) * 1e-15 / n;
  for (int k = 0; k < 400; ++k) {
    const double mid = 0.5 * (lo + hi);
    (multiplier_equation(c, alpha, mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("multiplier matches a bisection oracle") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 40;
    std::vector<double> c(n);
    for (double& ci : c) ci = std::pow(u(rng), 1 + trial % 4);
    const double lo = *std::min_element(c.begin(), c.end());
    const double hi = *std::max_element(c.begin(), c.end());
    if (hi - lo < 1e-6) continue;
    const double alpha = lo + (hi - lo) * (0.02 + 0.96 * u(rng));
    const double xi = solve_xi(c, alpha);
    CHECK(xi == doctest::Approx(bisect_xi(c, alpha)).epsilon(1e-8));
    for (double ci : c) CHECK(1.0 + xi * (ci - alpha) > 0.0);
  }
}

TEST_CASE("multiplier edge cases") {
  const std::vector<double> c{0.1, 0.2, 0.4};
  CHECK(solve_xi(c, (0.1 + 0.2 + 0.4) / 3) == doctest::Approx(0.0).epsilon(1e-10));
  for (double bad : {0.05, 0.45}) {
    try {
      solve_xi(c, bad);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::infeasible_constraint);
    }
  }
}

TEST_CASE("inflated masses are distributions") {
  const Family fams[] = {Family::poisson(), Family::binomial(6), Family::geometric()};
  for (const Family& f : fams) {
    for (double w : {0.2, 0.7, 1.0}) {
      for (double eta : {-1.0, 0.5}) {
        const int top = f.kind() == FamilyKind::binomial ? 6 : 400;
        for (InflationForm form : {InflationForm::ztoi, InflationForm::oizt}) {
          double s = 0.0;
          for (int y = 0; y <= top; ++y) s += h_mass(form, f, y, eta, w);
          CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        }
        const double f0 = f.f0(eta), f1 = f.f1(eta);
        CHECK(h_mass(InflationForm::ztoi, f, 1, eta, w) ==
              doctest::Approx(w * f1 + 1 - w).epsilon(1e-14));
        CHECK(h_mass(InflationForm::oizt, f, 1, eta, w) ==
              doctest::Approx((1 - w) * (1 - f0) + w * f1).epsilon(1e-14));
        CHECK(h_mass(InflationForm::oizt, f, 0, eta, w) == doctest::Approx(f0).epsilon(1e-14));
        CHECK(zero_mass(InflationForm::ztoi, f, eta, w) == doctest::Approx(w * f0).epsilon(1e-14));
        CHECK(zero_mass(InflationForm::oizt, f, eta, w) == doctest::Approx(f0).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("profile log-EL equals the full log-EL at the profiled weights") {
  const Dataset d = testing::synthetic(Family::poisson(), 60, 0.2, 0.8, 0.2, 5);
  const Eigen::Vector2d beta(0.1, 0.7);
  for (InflationForm form : {InflationForm::ztoi, InflationForm::oizt, InflationForm::none}) {
    const Model model{Family::poisson(), form};
    const double w = form == InflationForm::none ? 1.0 : 0.8;
    const Eigen::VectorXd c = zero_masses(model, d, beta, w);
    const double alpha = 0.4 * c.minCoeff() + 0.6 * c.maxCoeff();
    const ProfileResult pr = profile_detail(model, d, 90.0, beta, w, alpha);
    REQUIRE(pr.feasible);
    CHECK(pr.p.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c.dot(pr.p) == doctest::Approx(alpha).epsilon(1e-10));
    const ElParams params{90.0, beta, w, alpha, pr.p};
    CHECK(log_el(model, d, params) == doctest::Approx(pr.value).epsilon(1e-12));
    CHECK(profile_log_el(model, d, 90.0, beta, w, alpha) == doctest::Approx(pr.value).epsilon(1e-14));
  }
}

TEST_CASE("no feasible weight vector beats the profile") {
  // any p on the simplex defines its own alpha = sum c_i p_i; the profile at
  // that alpha must dominate
  const Dataset d = testing::synthetic(Family::poisson(), 25, 0.0, 1.0, 0.1, 8);
  const Model model{Family::poisson(), InflationForm::ztoi};
  const Eigen::Vector2d beta(-0.1, 0.9);
  const double w = 0.85;
  const Eigen::VectorXd c = zero_masses(model, d, beta, w);
  std::mt19937_64 rng(21);
  std::gamma_distribution<double> g(1.5);
  for (int trial = 0; trial < 300; ++trial) {
    Eigen::VectorXd p(25);
    for (int i = 0; i < 25; ++i) p[i] = g(rng);
    p /= p.sum();
    const double alpha = c.dot(p);
    const ElParams params{40.0, beta, w, alpha, p};
    CHECK(log_el(model, d, params) <= profile_log_el(model, d, 40.0, beta, w, alpha) + 1e-10);
  }
}

TEST_CASE("profile outside the hull is reported infeasible") {
  const Dataset d = testing::synthetic(Family::poisson(), 20, 0.0, 1.0, 0.0, 2);
  const Model model{Family::poisson(), InflationForm::none};
  const Eigen::Vector2d beta(0.0, 1.0);
  const double above = zero_masses(model, d, beta, 1.0).maxCoeff() + 0.01;
  const ProfileResult pr = profile_detail(model, d, 30.0, beta, 1.0, above);
  CHECK_FALSE(pr.feasible);
  CHECK(pr.value == -num::kInf);
}

TEST_CASE("forms by name") {
  CHECK(form_from_name("ztoi") == InflationForm::ztoi);
  CHECK(form_from_name("oizt") == InflationForm::oizt);
  CHECK(form_from_name("none") == InflationForm::none);
  CHECK(form_name(InflationForm::oizt) == "oizt");
  CHECK_THROWS_AS(form_from_name("zip"), Error);
}
