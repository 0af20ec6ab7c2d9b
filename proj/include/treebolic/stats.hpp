#pragma once

#include <cstddef>
#include <vector>

namespace treebolic {

/// Streaming mean/variance accumulator (Welford). merge() combines two
/// accumulators exactly, so replica results can be reduced in a fixed order.
struct RunningStat {
  long long n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    n += 1;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }

  void merge(const RunningStat& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double d = o.mean - mean;
    const long long tot = n + o.n;
    mean += d * static_cast<double>(o.n) / static_cast<double>(tot);
    m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) / static_cast<double>(tot);
    n = tot;
  }

  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double stderr_mean() const;
};

/// Upper regularized incomplete gamma Q(s, x).
double regularized_gamma_upper(double s, double x);

/// Upper-tail p-value of a chi-square statistic.
double chi_square_pvalue(double stat, int dof);

struct LinFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LinFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

/// Two-sample Kolmogorov-Smirnov statistic (sup CDF gap). Inputs are copied
/// and sorted internally.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Rejection threshold c(alpha) * sqrt((n+m)/(n*m)) for the two-sample KS
/// test at significance alpha.
double ks_threshold(std::size_t n, std::size_t m, double alpha);

}  // namespace treebolic
