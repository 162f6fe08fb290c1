#include "oiel/dataset.hpp"

#include <algorithm>
#include <numeric>

#include "oiel/errors.hpp"

namespace oiel {

Dataset Dataset::from_covariates(const Eigen::MatrixXd& covariates,
                                 std::vector<int> counts, int trials,
                                 std::vector<std::string> names) {
  Eigen::MatrixXd design(covariates.rows(), covariates.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(covariates.cols()) = covariates;
  return from_design(std::move(design), std::move(counts), trials, std::move(names));
}

Dataset Dataset::from_design(Eigen::MatrixXd design, std::vector<int> counts,
                             int trials, std::vector<std::string> names) {
  const auto n = counts.size();
  if (n == 0) fail(ErrorCode::invalid_argument, "dataset has no captured units");
  if (static_cast<std::size_t>(design.rows()) != n)
    fail(ErrorCode::invalid_argument, "design rows and counts differ in length");
  if (design.cols() < 1 || !(design.col(0).array() == 1.0).all())
    fail(ErrorCode::invalid_argument, "design column 0 must be the intercept");
  if (!design.allFinite()) fail(ErrorCode::invalid_argument, "non-finite covariate value");
  if (trials < 0) fail(ErrorCode::invalid_argument, "negative number of occasions");
  for (std::size_t i = 0; i < n; ++i) {
    if (counts[i] < 1)
      fail(ErrorCode::truncation_violation,
           "row " + std::to_string(i + 1) + ": count " + std::to_string(counts[i]) +
               " < 1 in zero-truncated data");
    if (trials > 0 && counts[i] > trials)
      fail(ErrorCode::domain, "row " + std::to_string(i + 1) + ": count " +
                                  std::to_string(counts[i]) + " exceeds K = " +
                                  std::to_string(trials));
  }
  if (!names.empty() && static_cast<Eigen::Index>(names.size()) != design.cols() - 1)
    fail(ErrorCode::invalid_argument, "covariate names do not match the design");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_partition(order.begin(), order.end(),
                        [&](std::size_t i) { return counts[i] == 1; });

  Dataset out;
  out.x_.resize(design.rows(), design.cols());
  out.y_.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    out.x_.row(static_cast<Eigen::Index>(r)) = design.row(static_cast<Eigen::Index>(order[r]));
    out.y_[r] = counts[order[r]];
  }
  out.ones_ = static_cast<std::size_t>(std::count(out.y_.begin(), out.y_.end(), 1));
  out.trials_ = trials;
  if (names.empty())
    for (Eigen::Index j = 1; j < design.cols(); ++j) names.push_back("x" + std::to_string(j));
  out.names_ = std::move(names);
  return out;
}

int Dataset::max_count() const noexcept { return *std::max_element(y_.begin(), y_.end()); }

}  // namespace oiel
