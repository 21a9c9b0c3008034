#include <doctest.h>

#include <cmath>

#include "polytope/rng.hpp"
#include "polytope/stats.hpp"

using namespace polytope;

TEST_CASE("welch_t on identical samples is the null result") {
  const std::vector<double> a{1.0, 2.0, 3.0, 4.0};
  const WelchResult r = welch_t(a, a);
  CHECK(r.t == 0.0);
  CHECK(r.p_two_sided == 1.0);
}

TEST_CASE("welch_t matches the hand-derived symmetric example") {
  // Equal variances (s^2 = 2.5) and equal sizes collapse Welch to the
  // classic case: t = -1 exactly, dof = 8 exactly.
  const std::vector<double> a{1, 2, 3, 4, 5};
  const std::vector<double> b{2, 3, 4, 5, 6};
  const WelchResult r = welch_t(a, b);
  CHECK(r.t == -1.0);
  CHECK(r.dof == 8.0);
  // Cross-checked against an independent implementation (scipy).
  CHECK(r.p_two_sided == doctest::Approx(0.34659350708733416).epsilon(1e-10));
}

TEST_CASE("the t tail at |t|=14.7, dof~1873 has the reported magnitude") {
  const double p = student_t_p_two_sided(14.7, 1873.0);
  CHECK(p < 1e-40);
  CHECK(p > 1e-52);
  // Frozen from an independent implementation (scipy) at dof = 1873.
  CHECK(p == doctest::Approx(2.228675351428676e-46).epsilon(1e-6));
  const double p_paperlike = student_t_p_two_sided(-14.7, 1873.3);
  CHECK(p_paperlike == doctest::Approx(2.226735916993202e-46).epsilon(1e-6));
}

TEST_CASE("welch_t is antisymmetric and scale-equivariant") {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(12), b(9);
    for (double& x : a) x = rng.normal();
    for (double& x : b) x = 0.4 * rng.normal() + 0.3;
    const WelchResult ab = welch_t(a, b);
    const WelchResult ba = welch_t(b, a);
    CHECK(ab.t == -ba.t);
    CHECK(ab.p_two_sided == ba.p_two_sided);
    CHECK(ab.dof == ba.dof);

    std::vector<double> a4(a), b4(b);
    for (double& x : a4) x *= 4.0;  // power of two: exact in floating point
    for (double& x : b4) x *= 4.0;
    const WelchResult scaled = welch_t(a4, b4);
    CHECK(scaled.t == ab.t);

    std::vector<double> a3(a), b3(b);
    for (double& x : a3) x *= 3.0;
    for (double& x : b3) x *= 3.0;
    CHECK(welch_t(a3, b3).t == doctest::Approx(ab.t).epsilon(1e-12));
  }
}

TEST_CASE("welch_t degenerate conventions") {
  const std::vector<double> flat{2.0, 2.0, 2.0};
  const WelchResult same = welch_t(flat, flat);
  CHECK(same.degenerate);
  CHECK(same.p_two_sided == 1.0);
  const std::vector<double> other{3.0, 3.0, 3.0};
  const WelchResult diff = welch_t(flat, other);
  CHECK(diff.degenerate);
  CHECK(diff.p_two_sided == 0.0);
  CHECK(std::isinf(diff.t));
  CHECK_THROWS_AS(welch_t({1.0}, {1.0, 2.0}), ValidationError);
}

TEST_CASE("p decreases monotonically in |t| at fixed dof") {
  for (double dof : {1.5, 4.0, 30.0, 500.0}) {
    double previous = 1.1;
    for (double t = 0.0; t <= 12.0; t += 0.25) {
      const double p = student_t_p_two_sided(t, dof);
      CHECK(p <= previous);
      previous = p;
    }
  }
}

TEST_CASE("regularized incomplete beta matches closed forms") {
  CHECK(regularized_incomplete_beta(1.0, 1.0, 0.33) ==
        doctest::Approx(0.33).epsilon(1e-12));
  // I_x(1, b) = 1 - (1-x)^b
  for (double b : {0.5, 2.0, 7.0}) {
    for (double x : {0.1, 0.5, 0.9}) {
      CHECK(regularized_incomplete_beta(1.0, b, x) ==
            doctest::Approx(1.0 - std::pow(1.0 - x, b)).epsilon(1e-12));
    }
  }
  // Complement identity.
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const double a = rng.uniform(0.2, 20.0);
    const double b = rng.uniform(0.2, 20.0);
    const double x = rng.uniform(0.01, 0.99);
    const double sum = regularized_incomplete_beta(a, b, x) +
                       regularized_incomplete_beta(b, a, 1.0 - x);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
  }
  CHECK(regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0);
  CHECK_THROWS_AS(regularized_incomplete_beta(0.0, 1.0, 0.5), ValidationError);
}

TEST_CASE("bootstrap of a constant sample collapses to the value") {
  const BootstrapCi ci =
      bootstrap_ci({5.0, 5.0, 5.0, 5.0}, BootstrapStatistic::kMean, 0.95, 200, 1);
  CHECK(ci.low == 5.0);
  CHECK(ci.high == 5.0);
  CHECK(ci.point_estimate == 5.0);
}

TEST_CASE("bootstrap is deterministic for a fixed seed") {
  Rng rng(9);
  std::vector<double> sample(50);
  for (double& x : sample) x = rng.normal();
  const BootstrapCi a = bootstrap_ci(sample, BootstrapStatistic::kMedian, 0.99, 500, 7);
  const BootstrapCi b = bootstrap_ci(sample, BootstrapStatistic::kMedian, 0.99, 500, 7);
  CHECK(a.low == b.low);
  CHECK(a.high == b.high);
  CHECK(a.low <= a.point_estimate);
  CHECK(a.point_estimate <= a.high);
}

TEST_CASE("bootstrap mean interval width tracks the asymptotic width") {
  Rng rng(17);
  std::vector<double> sample(1000);
  for (double& x : sample) x = rng.normal();
  const BootstrapCi ci = bootstrap_ci(sample, BootstrapStatistic::kMean, 0.95, 4000, 3);
  const double asymptotic = 2.0 * 1.96 / std::sqrt(1000.0);
  CHECK(std::abs((ci.high - ci.low) - asymptotic) / asymptotic < 0.25);
}

TEST_CASE("bootstrap rejects invalid parameters") {
  CHECK_THROWS_AS(bootstrap_ci({1.0}, BootstrapStatistic::kMean, 0.95, 10, 1),
                  ValidationError);
  CHECK_THROWS_AS(bootstrap_ci({1.0, 2.0}, BootstrapStatistic::kMean, 1.0, 10, 1),
                  ValidationError);
  CHECK_THROWS_AS(bootstrap_ci({1.0, 2.0}, BootstrapStatistic::kMean, 0.0, 10, 1),
                  ValidationError);
}

TEST_CASE("95% bootstrap mean intervals cover the true mean at a sane rate") {
  int covered = 0;
  const int runs = 500;
  for (int run = 0; run < runs; ++run) {
    Rng rng(mix_seed(1234, run));
    std::vector<double> sample(30);
    for (double& x : sample) x = rng.normal() + 1.5;  // true mean 1.5
    const BootstrapCi ci =
        bootstrap_ci(sample, BootstrapStatistic::kMean, 0.95, 400, mix_seed(99, run));
    covered += ci.low <= 1.5 && 1.5 <= ci.high;
  }
  const double rate = static_cast<double>(covered) / runs;
  CHECK(rate >= 0.90);
  CHECK(rate <= 0.99);
}
