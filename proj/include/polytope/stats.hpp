#pragma once

#include <cstdint>
#include <vector>

namespace polytope {

struct WelchResult {
  double t = 0.0;
  double dof = 0.0;  // Welch-Satterthwaite, generally non-integer
  double p_two_sided = 1.0;
  bool degenerate = false;  // both samples had zero variance
};

// Unequal-variance t-test. Requires each sample to have >= 2 values.
// If both variances are zero: equal means give p = 1, distinct means give
// the p = 0 limit, with `degenerate` set either way.
WelchResult welch_t(const std::vector<double>& a, const std::vector<double>& b);

// Two-sided tail of Student's t with `dof` degrees of freedom,
// p = I_{dof/(dof+t^2)}(dof/2, 1/2).
double student_t_p_two_sided(double t, double dof);

// Regularized incomplete beta I_x(a, b), evaluated with the Lentz continued
// fraction on whichever orientation converges fast; accurate deep into the
// tails (no 1 - tiny cancellation on the small side).
double regularized_incomplete_beta(double a, double b, double x);

enum class BootstrapStatistic { kMean, kMedian };

struct BootstrapCi {
  double level = 0.99;
  double low = 0.0;
  double high = 0.0;
  double point_estimate = 0.0;
  int n_resamples = 0;
};

inline constexpr int kDefaultBootstrapResamples = 10000;

// Percentile-method bootstrap interval from seeded resampling with
// replacement. Deterministic for a fixed seed regardless of worker count.
BootstrapCi bootstrap_ci(const std::vector<double>& sample, BootstrapStatistic statistic,
                         double level, int n_resamples, std::uint64_t seed);

}  // namespace polytope
