#include "fpp/stats.hpp"

#include <algorithm>
#include <cmath>

#include "fpp/errors.hpp"

namespace fpp {

double Welford::stderr_mean() const {
  if (n < 2) return 0.0;
  return std::sqrt(variance_sample() / static_cast<double>(n));
}

double mean_of(std::span<const double> xs) {
  if (xs.empty()) throw Error("mean_of: empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw Error("quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw Error("quantile: q must lie in [0, 1]");
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, xs.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return xs[lo] + frac * (xs[hi] - xs[lo]);
}

double median(std::vector<double> xs) { return quantile(std::move(xs), 0.5); }

double abs_moment(std::span<const double> xs, int k) {
  if (xs.empty()) throw Error("abs_moment: empty sample");
  double s = 0.0;
  for (double x : xs) s += std::pow(std::abs(x), k);
  return s / static_cast<double>(xs.size());
}

double jackknife_variance_se(std::span<const double> xs) {
  const long n = static_cast<long>(xs.size());
  if (n < 3) return 0.0;
  double sum = 0.0, sum2 = 0.0;
  for (double x : xs) {
    sum += x;
    sum2 += x * x;
  }
  // leave-one-out sample variances in closed form
  std::vector<double> loo(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) {
    const double s1 = sum - xs[i];
    const double s2 = sum2 - xs[i] * xs[i];
    const double m = s1 / static_cast<double>(n - 1);
    loo[i] = std::max(0.0, (s2 - static_cast<double>(n - 1) * m * m) /
                               static_cast<double>(n - 2));
  }
  const double mbar = mean_of(loo);
  double ss = 0.0;
  for (double v : loo) ss += (v - mbar) * (v - mbar);
  return std::sqrt(ss * static_cast<double>(n - 1) / static_cast<double>(n));
}

FitResult linear_fit(std::span<const double> x, std::span<const double> y) {
  FitResult fit;
  if (x.size() != y.size() || x.size() < 2) return fit;
  const long n = static_cast<long>(x.size());
  double mx = 0.0, my = 0.0;
  for (long i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (long i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0) return fit;
  fit.exponent = sxy / sxx;
  fit.intercept = my - fit.exponent * mx;
  double ssr = 0.0;
  for (long i = 0; i < n; ++i) {
    const double r = y[i] - (fit.intercept + fit.exponent * x[i]);
    ssr += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  fit.std_error = n > 2 ? std::sqrt(ssr / static_cast<double>(n - 2) / sxx) : 0.0;
  fit.n = n;
  fit.valid = true;
  return fit;
}

FitResult loglog_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) return {};
  std::vector<double> lx(x.size()), ly(y.size());
  for (size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) return {};
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  return linear_fit(lx, ly);
}

TrendCheck trend_vs_log(std::span<const double> t, std::span<const double> y) {
  TrendCheck out;
  if (t.size() != y.size() || t.size() < 2) return out;
  std::vector<double> lt(t.size());
  for (size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] > 0.0)) return out;
    lt[i] = std::log(t[i]);
  }
  const FitResult fit = linear_fit(lt, y);
  if (!fit.valid) return out;
  out.slope = fit.exponent;
  out.slope_se = fit.std_error;
  out.valid = true;
  out.upward_beyond_2sigma = fit.exponent > 2.0 * fit.std_error;
  out.any_beyond_2sigma = std::abs(fit.exponent) > 2.0 * fit.std_error;
  return out;
}

}  // namespace fpp
