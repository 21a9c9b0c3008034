#include "polytope/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "polytope/error.hpp"
#include "polytope/parallel.hpp"
#include "polytope/rng.hpp"

namespace polytope {

namespace {

// Continued fraction for I_x(a, b) (Lentz's method). Valid for
// x < (a+1)/(a+b+2), where convergence is fast.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 500;
  constexpr double kEps = 3e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  return h;  // converged to working precision or ran out of terms
}

double sample_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v, double mean) {
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / static_cast<double>(v.size() - 1);
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double median_of(std::vector<double>& scratch) {
  std::sort(scratch.begin(), scratch.end());
  const std::size_t n = scratch.size();
  return n % 2 == 1 ? scratch[n / 2] : 0.5 * (scratch[n / 2 - 1] + scratch[n / 2]);
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw ValidationError("regularized_incomplete_beta: a, b must be positive");
  }
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_p_two_sided(double t, double dof) {
  if (!(dof > 0.0)) throw ValidationError("student_t_p_two_sided: dof must be positive");
  if (t == 0.0) return 1.0;
  if (std::isinf(t)) return 0.0;
  const double x = dof / (dof + t * t);
  return regularized_incomplete_beta(0.5 * dof, 0.5, x);
}

WelchResult welch_t(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) {
    throw ValidationError("welch_t: each sample needs at least 2 values");
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double mean_a = sample_mean(a);
  const double mean_b = sample_mean(b);
  const double var_a = sample_variance(a, mean_a);
  const double var_b = sample_variance(b, mean_b);

  WelchResult result;
  if (var_a == 0.0 && var_b == 0.0) {
    result.degenerate = true;
    result.dof = na + nb - 2.0;
    if (mean_a == mean_b) {
      result.t = 0.0;
      result.p_two_sided = 1.0;
    } else {
      result.t = mean_a > mean_b ? std::numeric_limits<double>::infinity()
                                 : -std::numeric_limits<double>::infinity();
      result.p_two_sided = 0.0;
    }
    return result;
  }

  const double se_a = var_a / na;
  const double se_b = var_b / nb;
  result.t = (mean_a - mean_b) / std::sqrt(se_a + se_b);
  result.dof = (se_a + se_b) * (se_a + se_b) /
               (se_a * se_a / (na - 1.0) + se_b * se_b / (nb - 1.0));
  result.p_two_sided = student_t_p_two_sided(result.t, result.dof);
  return result;
}

BootstrapCi bootstrap_ci(const std::vector<double>& sample, BootstrapStatistic statistic,
                         double level, int n_resamples, std::uint64_t seed) {
  if (sample.size() < 2) throw ValidationError("bootstrap_ci: need at least 2 values");
  if (!(level > 0.0 && level < 1.0)) {
    throw ValidationError("bootstrap_ci: level must be inside (0, 1)");
  }
  if (n_resamples < 1) throw ValidationError("bootstrap_ci: need at least 1 resample");

  const std::size_t n = sample.size();
  std::vector<double> stats(n_resamples);
  parallel_for(n_resamples, [&](std::int64_t r) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(r)));
    std::vector<double> resample(n);
    for (std::size_t i = 0; i < n; ++i) {
      resample[i] = sample[rng.uniform_int(n)];
    }
    stats[r] = statistic == BootstrapStatistic::kMean ? sample_mean(resample)
                                                      : median_of(resample);
  });
  std::sort(stats.begin(), stats.end());

  BootstrapCi ci;
  ci.level = level;
  ci.n_resamples = n_resamples;
  const double alpha = 1.0 - level;
  ci.low = quantile_sorted(stats, alpha / 2.0);
  ci.high = quantile_sorted(stats, 1.0 - alpha / 2.0);
  std::vector<double> scratch(sample);
  ci.point_estimate = statistic == BootstrapStatistic::kMean
                          ? sample_mean(scratch)
                          : median_of(scratch);
  return ci;
}

}  // namespace polytope
