#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace oiel {

// Observed (captured at least once) units. Rows are held ones-first: the
// first ones() rows have count 1. Column 0 of the design is the intercept.
class Dataset {
 public:
  // covariates excludes the intercept column; it is prepended here.
  static Dataset from_covariates(const Eigen::MatrixXd& covariates,
                                 std::vector<int> counts, int trials = 0,
                                 std::vector<std::string> names = {});
  // design already carries the intercept in column 0.
  static Dataset from_design(Eigen::MatrixXd design, std::vector<int> counts,
                             int trials = 0, std::vector<std::string> names = {});

  const Eigen::MatrixXd& x() const noexcept { return x_; }
  const std::vector<int>& y() const noexcept { return y_; }
  std::size_t n() const noexcept { return y_.size(); }
  std::size_t ones() const noexcept { return ones_; }
  Eigen::Index dim() const noexcept { return x_.cols(); }
  int trials() const noexcept { return trials_; }
  int max_count() const noexcept;
  // covariate names, without the intercept
  const std::vector<std::string>& names() const noexcept { return names_; }

 private:
  Dataset() = default;

  Eigen::MatrixXd x_;
  std::vector<int> y_;
  std::size_t ones_ = 0;
  int trials_ = 0;
  std::vector<std::string> names_;
};

}  // namespace oiel
