#pragma once

#include <optional>
#include <vector>

#include "oiel/el_core.hpp"

namespace oiel {

struct EmConfig {
  double tol = 1e-5;
  int max_iter = 5000;
  // Warm start; when absent the fit starts from a naive untruncated GLM and
  // tries each entry of start_w, keeping the best log-EL.
  std::optional<ElParams> init;
  std::vector<double> start_w{0.5, 0.9, 0.99};
  double n_max_factor = 1e7;
  MlOptions ml;
};

struct TraceEntry {
  double loglik;
  double N;
  double w;
  double alpha;
};

struct ElFit {
  Model model;
  ElParams params;
  double loglik = 0.0;
  std::vector<TraceEntry> trace;
  bool converged = false;
  bool fixed_n = false;
  int iterations = 0;
  // EM runs behind this fit (one per start) and the largest one-step drop
  // of the log-EL seen in any of them
  int runs = 0;
  double max_decrease = 0.0;
};

// v: posterior probability that a count of one came from f.
// u: expected number of never-captured units sharing covariate x_i.
// imputed: OIZT only, E_f[Y* | Y* >= 1, x_i] for the inflated ones.
struct LatentWeights {
  Eigen::VectorXd v;
  Eigen::VectorXd u;
  Eigen::VectorXd imputed;
};

LatentWeights e_step(const Model& model, const Dataset& data, const ElParams& params,
                     double N);

// One M-step. current supplies the starting beta of the GLM update; the
// returned parameters carry N unchanged.
ElParams m_step(const Model& model, const Dataset& data, const LatentWeights& weights,
                const ElParams& current, double N, const MlOptions& ml = {});

// argmax over N in [n, n_max] of log C(N, n) + (N - n) log(alpha).
double update_n(double alpha, std::size_t n, double n_max);

ElParams initial_params(const Model& model, const Dataset& data, double w0,
                        std::optional<double> fixed_n = {}, const MlOptions& ml = {});

ElFit fit(const Model& model, const Dataset& data, const EmConfig& config = {},
          std::optional<double> fixed_n = {});

}  // namespace oiel
