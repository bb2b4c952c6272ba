#pragma once

#include <span>
#include <vector>

namespace fpp {

// Streaming mean/variance. On bit-identical inputs M2 stays exactly zero,
// which the empty-environment controls rely on.
struct Welford {
  long n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double variance_sample() const { return n < 2 ? 0.0 : m2 / static_cast<double>(n - 1); }
  double variance_population() const { return n < 1 ? 0.0 : m2 / static_cast<double>(n); }
  double stderr_mean() const;
};

double mean_of(std::span<const double> xs);
// Lower interpolated quantile; q in [0, 1].
double quantile(std::vector<double> xs, double q);
double median(std::vector<double> xs);

// Raw absolute moment E|x|^k.
double abs_moment(std::span<const double> xs, int k);

// Jackknife standard error of the sample variance.
double jackknife_variance_se(std::span<const double> xs);

struct FitResult {
  double exponent = 0.0;   // slope
  double intercept = 0.0;
  double std_error = 0.0;  // of the slope
  double r_squared = 0.0;
  long n = 0;
  bool valid = false;
};

// Least squares on (log x, log y); points with nonpositive x or y are
// rejected (fit marked invalid) rather than silently dropped.
FitResult loglog_fit(std::span<const double> x, std::span<const double> y);

// Plain least squares y = a + b x.
FitResult linear_fit(std::span<const double> x, std::span<const double> y);

struct TrendCheck {
  double slope = 0.0;
  double slope_se = 0.0;
  bool upward_beyond_2sigma = false;
  bool any_beyond_2sigma = false;
  bool valid = false;
};

// OLS slope of y against log t with a 2-sigma flatness verdict.
TrendCheck trend_vs_log(std::span<const double> t, std::span<const double> y);

}  // namespace fpp
