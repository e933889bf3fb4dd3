#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "robgen/error.hpp"

namespace robgen::stats {

// r x c table of non-negative counts, rows-major.
struct ContingencyTable {
  std::vector<std::vector<std::uint64_t>> counts;

  std::size_t rows() const { return counts.size(); }
  std::size_t cols() const { return counts.empty() ? 0 : counts.front().size(); }
  std::uint64_t n() const;
};

// Throws InvalidDims for ragged or smaller-than-2x2 tables and
// DegenerateTable for n == 0 or an all-zero row or column.
void validate(const ContingencyTable& t);

struct ChiSquareResult {
  double chi2 = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

struct ChiSquareOptions {
  bool yates = false;  // continuity correction, 2x2 tables only
};

ChiSquareResult chi_square(const ContingencyTable& t, ChiSquareOptions options = {});

// Survival function of the chi-square distribution, Q(dof/2, x/2).
double chi_square_sf(double x, double dof);

// Regularized upper incomplete gamma Q(a, x), a > 0, x >= 0.
double gamma_q(double a, double x);

double cramers_v(double chi2, std::uint64_t n, std::size_t r, std::size_t c);

struct KappaResult {
  double kappa = 0.0;  // NaN when degenerate
  double p_o = 0.0;
  double p_e = 0.0;
  bool degenerate = false;  // p_e == 1, kappa undefined
};

// Square confusion matrix, rater A on rows.
KappaResult cohen_kappa(const std::vector<std::vector<std::uint64_t>>& confusion);
KappaResult cohen_kappa(const std::vector<std::string>& labels_a,
                        const std::vector<std::string>& labels_b);

// Nearest-rank percentile: element ceil(p*n) (1-based) of the sorted values.
double percentile_nearest_rank(std::vector<double> values, double p);

// Rows are bins of `values` split at ascending `edges` (bin i holds
// edges[i-1] <= v < edges[i]); columns are the distinct group labels in
// sorted order.
struct BinnedTable {
  ContingencyTable table;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
};

BinnedTable build_contingency(const std::vector<double>& values,
                              const std::vector<std::string>& groups,
                              const std::vector<double>& edges);

template <typename K>
std::map<K, double> fractions(const std::map<K, std::uint64_t>& counts) {
  std::uint64_t total = 0;
  for (const auto& [k, c] : counts) total += c;
  if (total == 0) throw Error(ErrorKind::EmptyInput, "no observations");
  std::map<K, double> out;
  for (const auto& [k, c] : counts)
    if (c > 0) out[k] = static_cast<double>(c) / static_cast<double>(total);
  return out;
}

}  // namespace robgen::stats
