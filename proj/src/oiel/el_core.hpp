#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <string_view>

#include "oiel/dataset.hpp"
#include "oiel/families.hpp"

namespace oiel {

// ZTOI: inflate at one, then truncate at zero. OIZT: truncate at zero, then
// inflate at one. NONE pins w = 1.
enum class InflationForm { ztoi, oizt, none };

std::string form_name(InflationForm form);
InflationForm form_from_name(std::string_view name);

struct Model {
  Family family;
  InflationForm form = InflationForm::none;
};

// Parameters of the log-EL. N is a continuous relaxation of the abundance.
struct ElParams {
  double N = 0.0;
  Eigen::VectorXd beta;
  double w = 1.0;
  double alpha = 0.0;
  Eigen::VectorXd p;
};

// h(y) for ZTOI, h_e(y) for OIZT, f(y) for NONE (w ignored).
double h_mass(InflationForm form, const Family& family, int y, double eta, double w);
double h_mass(InflationForm form, const Family& family, int y,
              const Eigen::VectorXd& x, const Eigen::VectorXd& beta, double w);

// Zero mass entering the moment constraint: w f(0) for ZTOI, f(0) otherwise.
double zero_mass(InflationForm form, const Family& family, double eta, double w);
Eigen::VectorXd zero_masses(const Model& model, const Dataset& data,
                            const Eigen::VectorXd& beta, double w);

// Lagrange multiplier of the constraint sum_i (c_i - alpha) p_i = 0: the
// root of sum_i d_i / (1 + xi d_i) with d_i = c_i - alpha, taken inside the
// interval where every 1 + xi d_i > 0. Throws infeasible_constraint when
// alpha lies outside the hull of c.
double solve_xi(std::span<const double> c, double alpha);

inline double solve_xi(const Eigen::VectorXd& c, double alpha) {
  return solve_xi(std::span<const double>(c.data(), static_cast<std::size_t>(c.size())), alpha);
}

// Full log-EL. Returns -inf when some h(y_i) or p_i vanishes.
double log_el(const Model& model, const Dataset& data, const ElParams& params);

struct ProfileResult {
  double value;
  double xi;
  Eigen::VectorXd p;
  bool feasible;
};

// Profile log-EL with the p_i profiled out. Includes the -n log n constant
// for every form so that it coincides with log_el at the profiled p. An
// infeasible alpha yields value = -inf and feasible = false.
ProfileResult profile_detail(const Model& model, const Dataset& data, double N,
                             const Eigen::VectorXd& beta, double w, double alpha);

double profile_log_el(const Model& model, const Dataset& data, double N,
                      const Eigen::VectorXd& beta, double w, double alpha);

}  // namespace oiel
