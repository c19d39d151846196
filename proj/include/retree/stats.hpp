#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace retree {

// Two-sided Kolmogorov-Smirnov statistic of `samples` against a reference
// CDF given by its right-continuous values and its left limits. The
// supremum of |ecdf - F| over the line is attained approaching a sample
// point from one of its two sides, so it suffices to compare F to the
// pre-run and post-run empirical heights of every tied block.
inline double ks_statistic(std::vector<double> samples,
                           const std::function<double(double)>& cdf,
                           const std::function<double(double)>& cdf_left) {
  if (samples.empty()) throw std::invalid_argument("ks_statistic: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < samples.size()) {
    std::size_t j = i;
    while (j < samples.size() && samples[j] == samples[i]) ++j;
    d = std::max(d, std::abs(cdf(samples[i]) - static_cast<double>(j) / n));
    d = std::max(d,
                 std::abs(cdf_left(samples[i]) - static_cast<double>(i) / n));
    i = j;
  }
  return d;
}

// Continuous-reference form: the left limit coincides with the CDF.
inline double ks_statistic(std::vector<double> samples,
                           const std::function<double(double)>& cdf) {
  return ks_statistic(std::move(samples), cdf, cdf);
}

// Pearson statistic against the uniform distribution over the cells.
inline double chi_square_uniform(const std::vector<std::uint64_t>& counts) {
  if (counts.empty()) throw std::invalid_argument("chi_square_uniform: no cells");
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) throw std::invalid_argument("chi_square_uniform: empty sample");
  const double expected =
      static_cast<double>(total) / static_cast<double>(counts.size());
  double stat = 0.0;
  for (auto c : counts) {
    double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  return stat;
}

// Two-sample Pearson statistic on matched cell layouts (df = cells - 1).
inline double chi_square_two_sample(const std::vector<std::uint64_t>& a,
                                    const std::vector<std::uint64_t>& b) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("chi_square_two_sample: cell mismatch");
  double ka = 0.0, kb = 0.0;
  for (auto c : a) ka += static_cast<double>(c);
  for (auto c : b) kb += static_cast<double>(c);
  if (ka == 0.0 || kb == 0.0)
    throw std::invalid_argument("chi_square_two_sample: empty sample");
  double stat = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double oa = static_cast<double>(a[i]);
    double ob = static_cast<double>(b[i]);
    double tot = oa + ob;
    if (tot == 0.0) continue;
    double ea = ka * tot / (ka + kb);
    double eb = kb * tot / (ka + kb);
    stat += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
  }
  return stat;
}

// Regularized lower incomplete gamma P(a, x); series for x < a + 1,
// Lentz continued fraction otherwise.
inline double gamma_p(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_p: bad args");
  if (x == 0.0) return 0.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - lg);
  }
  double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
  for (int i = 1; i < 500; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::abs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return 1.0 - std::exp(-x + a * std::log(x) - lg) * h;
}

// Upper critical value of chi-square with `df` degrees of freedom at
// significance 0.001, by bisection on the CDF (accurate to ~1e-9).
inline double chi_square_critical_001(int df) {
  if (df < 1) throw std::invalid_argument("chi_square_critical_001: bad df");
  const double target = 0.999;
  double lo = 0.0, hi = df + 40.0 * std::sqrt(2.0 * df) + 40.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (gamma_p(0.5 * df, 0.5 * mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// L1 distance between the empirical quantile functions (Wasserstein-1 for
// empirical measures). For equal sizes this is the mean absolute difference
// of the sorted samples.
inline double wasserstein1_empirical(std::vector<double> a,
                                     std::vector<double> b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("wasserstein1_empirical: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const std::size_t n = a.size(), m = b.size();
  if (n == m) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::abs(a[i] - b[i]);
    return s / static_cast<double>(n);
  }
  // Integrate |Qa - Qb| over (0,1); quantile functions are step functions
  // with breaks at i/n and j/m.
  double s = 0.0, lo = 0.0;
  std::size_t i = 0, j = 0;
  while (i < n && j < m) {
    double hi_a = static_cast<double>(i + 1) / static_cast<double>(n);
    double hi_b = static_cast<double>(j + 1) / static_cast<double>(m);
    double hi = std::min(hi_a, hi_b);
    s += (hi - lo) * std::abs(a[i] - b[j]);
    if (hi_a <= hi) ++i;
    if (hi_b <= hi) ++j;
    lo = hi;
  }
  return s;
}

inline double mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline double sample_stddev(const std::vector<double>& xs) {
  double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

}  // namespace retree
