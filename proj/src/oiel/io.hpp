#pragma once

// CSV ingestion and the goodness-of-fit table.
//
// Input files have a header row; the count column is named `y` and every
// other column is a numeric covariate. Blank lines are ignored.

#include <istream>
#include <string>
#include <vector>

#include "oiel/em.hpp"

namespace oiel {

// trials is K for binomial data, 0 otherwise.
Dataset read_dataset(const std::string& path, int trials = 0);
Dataset parse_dataset(std::istream& in, int trials = 0, const std::string& source = "<input>");

// Writes the rows in the dataset's (ones-first) order with round-trip
// precision.
void write_dataset(const std::string& path, const Dataset& data);
void write_dataset(std::ostream& out, const Dataset& data);

// pr(Y = y | x, Y > 0) under the fitted inflated model.
double conditional_pmf(const Model& model, int y, double eta, double w);

struct GofBin {
  int lower;
  int upper;  // -1 for an open-ended last bin
  double observed;
  double fitted;
};

struct GofReport {
  std::vector<GofBin> bins;
  double chi2 = 0.0;
  int df = 0;
  std::vector<std::string> notes;
};

// Fitted frequencies are sum_i pr(Y = y | x_i, Y > 0). Counts below the
// observed maximum get their own bin; the last bin collects y >= max so the
// fitted column sums to n. Pearson's statistic is the independence test on
// the 2 x C table of observed and fitted rows.
GofReport gof(const ElFit& fit, const Dataset& data);

double pearson_independence(const std::vector<double>& row_a, const std::vector<double>& row_b);

}  // namespace oiel
