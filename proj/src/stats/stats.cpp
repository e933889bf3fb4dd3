#include "robgen/stats/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace robgen::stats {

std::uint64_t ContingencyTable::n() const {
  std::uint64_t total = 0;
  for (const auto& row : counts)
    for (auto c : row) total += c;
  return total;
}

void validate(const ContingencyTable& t) {
  if (t.rows() < 2 || t.cols() < 2)
    throw Error(ErrorKind::InvalidDims, "table must be at least 2x2, got " + std::to_string(t.rows()) +
                                            "x" + std::to_string(t.cols()));
  for (const auto& row : t.counts)
    if (row.size() != t.cols()) throw Error(ErrorKind::InvalidDims, "ragged table");
  if (t.n() == 0) throw Error(ErrorKind::DegenerateTable, "table total is zero");
  for (std::size_t i = 0; i < t.rows(); ++i) {
    std::uint64_t s = 0;
    for (auto c : t.counts[i]) s += c;
    if (s == 0) throw Error(ErrorKind::DegenerateTable, "row " + std::to_string(i) + " is all zero");
  }
  for (std::size_t j = 0; j < t.cols(); ++j) {
    std::uint64_t s = 0;
    for (const auto& row : t.counts) s += row[j];
    if (s == 0) throw Error(ErrorKind::DegenerateTable, "column " + std::to_string(j) + " is all zero");
  }
}

ChiSquareResult chi_square(const ContingencyTable& t, ChiSquareOptions options) {
  validate(t);
  const std::size_t r = t.rows(), c = t.cols();
  const double n = static_cast<double>(t.n());
  std::vector<double> rs(r, 0.0), cs(c, 0.0);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      rs[i] += static_cast<double>(t.counts[i][j]);
      cs[j] += static_cast<double>(t.counts[i][j]);
    }
  const bool yates = options.yates && r == 2 && c == 2;
  double chi2 = 0.0;
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      double e = rs[i] * cs[j] / n;
      double d = std::abs(static_cast<double>(t.counts[i][j]) - e);
      if (yates) d = std::max(0.0, d - 0.5);
      chi2 += d * d / e;
    }
  ChiSquareResult out;
  out.chi2 = chi2;
  out.dof = static_cast<int>((r - 1) * (c - 1));
  out.p_value = chi_square_sf(chi2, out.dof);
  return out;
}

namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxIter = 10000;

// P(a, x) by its power series; converges fast for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a, sum = term, ap = a;
  for (int i = 0; i < kMaxIter; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Q(a, x) by Lentz's continued fraction; used for x >= a + 1.
double gamma_q_fraction(double a, double x) {
  const double tiny = std::numeric_limits<double>::min() / kEps;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0 || std::isnan(x))
    throw Error(ErrorKind::InvalidArgument, "gamma_q needs a > 0 and x >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return std::clamp(1.0 - gamma_p_series(a, x), 0.0, 1.0);
  return std::clamp(gamma_q_fraction(a, x), 0.0, 1.0);
}

double chi_square_sf(double x, double dof) {
  if (!(dof > 0.0)) throw Error(ErrorKind::InvalidArgument, "dof must be positive");
  if (x <= 0.0) return 1.0;
  return gamma_q(dof / 2.0, x / 2.0);
}

double cramers_v(double chi2, std::uint64_t n, std::size_t r, std::size_t c) {
  if (n == 0 || std::min(r, c) < 2)
    throw Error(ErrorKind::InvalidDims, "cramers_v needs n > 0 and min(r, c) >= 2");
  if (chi2 < 0.0 || std::isnan(chi2)) throw Error(ErrorKind::InvalidArgument, "chi2 must be >= 0");
  double v = std::sqrt(chi2 / (static_cast<double>(n) * static_cast<double>(std::min(r, c) - 1)));
  return std::clamp(v, 0.0, 1.0);
}

KappaResult cohen_kappa(const std::vector<std::vector<std::uint64_t>>& m) {
  const std::size_t k = m.size();
  if (k == 0) throw Error(ErrorKind::EmptyInput, "empty confusion matrix");
  for (const auto& row : m)
    if (row.size() != k) throw Error(ErrorKind::InvalidDims, "confusion matrix must be square");
  double n = 0.0, agree = 0.0;
  std::vector<double> ra(k, 0.0), cb(k, 0.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      double v = static_cast<double>(m[i][j]);
      n += v;
      ra[i] += v;
      cb[j] += v;
      if (i == j) agree += v;
    }
  if (n == 0.0) throw Error(ErrorKind::EmptyInput, "confusion matrix total is zero");
  KappaResult out;
  out.p_o = agree / n;
  for (std::size_t i = 0; i < k; ++i) out.p_e += (ra[i] / n) * (cb[i] / n);
  if (out.p_e >= 1.0 - 1e-15) {
    out.degenerate = true;
    out.kappa = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.kappa = (out.p_o - out.p_e) / (1.0 - out.p_e);
  return out;
}

KappaResult cohen_kappa(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.size() != b.size())
    throw Error(ErrorKind::LengthMismatch,
                std::to_string(a.size()) + " vs " + std::to_string(b.size()) + " labels");
  if (a.empty()) throw Error(ErrorKind::EmptyInput, "no labels");
  std::set<std::string> space(a.begin(), a.end());
  space.insert(b.begin(), b.end());
  std::vector<std::string> labels(space.begin(), space.end());
  auto index = [&](const std::string& s) {
    return static_cast<std::size_t>(std::lower_bound(labels.begin(), labels.end(), s) - labels.begin());
  };
  std::vector<std::vector<std::uint64_t>> m(labels.size(), std::vector<std::uint64_t>(labels.size(), 0));
  for (std::size_t i = 0; i < a.size(); ++i) ++m[index(a[i])][index(b[i])];
  return cohen_kappa(m);
}

double percentile_nearest_rank(std::vector<double> values, double p) {
  if (values.empty()) throw Error(ErrorKind::EmptyInput, "percentile of no values");
  if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorKind::InvalidArgument, "p must be in (0, 1]");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  // the epsilon keeps products like 0.9 * 20 from rounding up past an integer
  auto rank = static_cast<std::size_t>(std::ceil(p * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

BinnedTable build_contingency(const std::vector<double>& values, const std::vector<std::string>& groups,
                              const std::vector<double>& edges) {
  if (values.size() != groups.size())
    throw Error(ErrorKind::LengthMismatch, "values and groups differ in length");
  if (values.empty()) throw Error(ErrorKind::EmptyInput, "no observations");
  if (edges.empty() || !std::is_sorted(edges.begin(), edges.end()) ||
      std::adjacent_find(edges.begin(), edges.end()) != edges.end())
    throw Error(ErrorKind::InvalidArgument, "bin edges must be non-empty and strictly ascending");

  BinnedTable out;
  std::set<std::string> g(groups.begin(), groups.end());
  out.col_labels.assign(g.begin(), g.end());
  auto fmt = [](double v) {
    std::string s = std::to_string(v);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  };
  out.row_labels.push_back("<" + fmt(edges.front()));
  for (std::size_t i = 1; i < edges.size(); ++i)
    out.row_labels.push_back("[" + fmt(edges[i - 1]) + "," + fmt(edges[i]) + ")");
  out.row_labels.push_back(">=" + fmt(edges.back()));

  out.table.counts.assign(out.row_labels.size(), std::vector<std::uint64_t>(out.col_labels.size(), 0));
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto row = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), values[i]) - edges.begin());
    auto col = static_cast<std::size_t>(
        std::lower_bound(out.col_labels.begin(), out.col_labels.end(), groups[i]) - out.col_labels.begin());
    ++out.table.counts[row][col];
  }
  return out;
}

}  // namespace robgen::stats
