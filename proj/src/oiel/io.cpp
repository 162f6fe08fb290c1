#include "oiel/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "oiel/errors.hpp"
#include "oiel/numerics.hpp"

namespace oiel {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_row(const std::string& line, const std::string& where) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (quoted) fail(ErrorCode::parse, where + ": unterminated quoted field");
  fields.push_back(trim(cur));
  return fields;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

Dataset parse_dataset(std::istream& in, int trials, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    header = split_row(line, source + ":" + std::to_string(line_no));
    break;
  }
  if (header.empty()) fail(ErrorCode::parse, source + ": missing header row");
  std::size_t y_col = header.size();
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == "y") y_col = j;
  if (y_col == header.size()) fail(ErrorCode::parse, source + ": header has no `y` column");
  std::vector<std::string> names;
  for (std::size_t j = 0; j < header.size(); ++j)
    if (j != y_col) names.push_back(header[j]);

  std::vector<int> counts;
  std::vector<double> cov;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    const auto fields = split_row(line, where);
    if (fields.size() != header.size())
      fail(ErrorCode::parse, where + ": expected " + std::to_string(header.size()) +
                                 " fields, found " + std::to_string(fields.size()));
    double y = 0.0;
    if (!parse_double(fields[y_col], y) || y != std::floor(y) || std::abs(y) > 1e9)
      fail(ErrorCode::parse, where + ": count `" + fields[y_col] + "` is not an integer");
    if (y < 1.0)
      fail(ErrorCode::truncation_violation,
           where + ": count " + fields[y_col] + " < 1; the data must be zero-truncated");
    if (trials > 0 && y > trials)
      fail(ErrorCode::domain, where + ": count " + fields[y_col] + " exceeds K = " +
                                  std::to_string(trials));
    counts.push_back(static_cast<int>(y));
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (j == y_col) continue;
      double v = 0.0;
      if (!parse_double(fields[j], v))
        fail(ErrorCode::parse, where + ": covariate `" + header[j] + "` value `" + fields[j] +
                                   "` is not numeric");
      cov.push_back(v);
    }
  }
  if (counts.empty()) fail(ErrorCode::parse, source + ": no data rows");
  const auto n = static_cast<Eigen::Index>(counts.size());
  const auto p = static_cast<Eigen::Index>(names.size());
  Eigen::MatrixXd x(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j) x(i, j) = cov[static_cast<std::size_t>(i * p + j)];
  return Dataset::from_covariates(x, std::move(counts), trials, std::move(names));
}

Dataset read_dataset(const std::string& path, int trials) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open `" + path + "`");
  return parse_dataset(in, trials, path);
}

namespace {

std::string shortest(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

void write_dataset(std::ostream& out, const Dataset& data) {
  out << "y";
  for (const auto& name : data.names()) out << ',' << name;
  out << '\n';
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(data.n()); ++i) {
    out << data.y()[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 1; j < data.dim(); ++j) out << ',' << shortest(data.x()(i, j));
    out << '\n';
  }
}

void write_dataset(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io, "cannot write `" + path + "`");
  write_dataset(out, data);
  if (!out) fail(ErrorCode::io, "write to `" + path + "` failed");
}

double conditional_pmf(const Model& model, int y, double eta, double w) {
  if (y < 1) return 0.0;
  const double c = zero_mass(model.form, model.family, eta, w);
  return h_mass(model.form, model.family, y, eta, w) / (1.0 - c);
}

double pearson_independence(const std::vector<double>& row_a, const std::vector<double>& row_b) {
  if (row_a.size() != row_b.size())
    fail(ErrorCode::invalid_argument, "pearson_independence: rows differ in length");
  double ta = 0.0, tb = 0.0;
  for (std::size_t j = 0; j < row_a.size(); ++j) {
    ta += row_a[j];
    tb += row_b[j];
  }
  const double total = ta + tb;
  double chi2 = 0.0;
  for (std::size_t j = 0; j < row_a.size(); ++j) {
    const double col = row_a[j] + row_b[j];
    if (col <= 0.0) continue;
    const double ea = ta * col / total, eb = tb * col / total;
    chi2 += (row_a[j] - ea) * (row_a[j] - ea) / ea + (row_b[j] - eb) * (row_b[j] - eb) / eb;
  }
  return chi2;
}

GofReport gof(const ElFit& fit, const Dataset& data) {
  const int top = data.max_count();
  const Eigen::VectorXd eta = data.x() * fit.params.beta;
  const double w = fit.model.form == InflationForm::none ? 1.0 : fit.params.w;
  const double n = static_cast<double>(data.n());

  GofReport r;
  for (int y = 1; y <= top; ++y) r.bins.push_back({y, y == top ? -1 : y, 0.0, 0.0});
  for (int y : data.y()) r.bins[static_cast<std::size_t>(y - 1)].observed += 1.0;
  double below = 0.0;
  for (int y = 1; y < top; ++y) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) s += conditional_pmf(fit.model, y, eta[i], w);
    r.bins[static_cast<std::size_t>(y - 1)].fitted = s;
    below += s;
  }
  r.bins.back().fitted = std::max(0.0, n - below);

  // a bin the model cannot produce would divide by zero in the table test
  for (std::size_t j = 0; j < r.bins.size();) {
    if (r.bins[j].fitted > 0.0 || r.bins[j].observed == 0.0 || r.bins.size() == 1) {
      ++j;
      continue;
    }
    const std::size_t into = j > 0 ? j - 1 : j + 1;
    GofBin& dst = r.bins[into];
    const GofBin src = r.bins[j];
    dst.lower = std::min(dst.lower, src.lower);
    dst.upper = (dst.upper < 0 || src.upper < 0) ? -1 : std::max(dst.upper, src.upper);
    dst.observed += src.observed;
    dst.fitted += src.fitted;
    r.notes.push_back("count " + std::to_string(src.lower) +
                      " has zero fitted frequency; merged into a neighbouring bin");
    r.bins.erase(r.bins.begin() + static_cast<std::ptrdiff_t>(j));
    if (into < j) j = into;
  }

  std::vector<double> obs, fitted;
  for (const auto& b : r.bins) {
    obs.push_back(b.observed);
    fitted.push_back(b.fitted);
  }
  r.chi2 = pearson_independence(obs, fitted);
  int used = 0;
  for (const auto& b : r.bins) used += (b.observed + b.fitted) > 0.0;
  r.df = std::max(0, used - 1);
  return r;
}

}  // namespace oiel
