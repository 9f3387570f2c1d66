#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "drg/beta.hpp"
#include "drg/rng.hpp"

using drg::beta_quantile;
using drg::reg_inc_beta;

namespace {

// Independent CDF for integer shapes: I_x(a,b) = sum_{j=a}^{a+b-1} C(a+b-1,j) x^j (1-x)^{a+b-1-j}.
// Evaluated in long double; no code shared with the library implementation.
long double binomial_beta_cdf(int a, int b, long double x) {
  const int n = a + b - 1;
  long double sum = 0.0L;
  for (int j = a; j <= n; ++j) {
    long double coef = 1.0L;
    for (int i = 0; i < j; ++i) coef = coef * (long double)(n - i) / (long double)(i + 1);
    sum += coef * std::pow(x, (long double)j) * std::pow(1.0L - x, (long double)(n - j));
  }
  return sum;
}

double binomial_beta_quantile(int a, int b, long double q) {
  long double lo = 0.0L, hi = 1.0L;
  for (int it = 0; it < 200; ++it) {
    long double mid = 0.5L * (lo + hi);
    if (binomial_beta_cdf(a, b, mid) < q)
      lo = mid;
    else
      hi = mid;
  }
  return (double)(0.5L * (lo + hi));
}

}  // namespace

TEST_CASE("incomplete beta rejects invalid parameters") {
  CHECK_THROWS_AS(reg_inc_beta(0.0, 1.0, 0.5), std::domain_error);
  CHECK_THROWS_AS(reg_inc_beta(1.0, -2.0, 0.5), std::domain_error);
  CHECK_THROWS_AS(reg_inc_beta(1.0, 1.0, -0.1), std::domain_error);
  CHECK_THROWS_AS(reg_inc_beta(1.0, 1.0, 1.5), std::domain_error);
  CHECK_THROWS_AS(beta_quantile(0.0, 1.0, 0.5), std::domain_error);
  CHECK_THROWS_AS(beta_quantile(1.0, 1.0, -0.2), std::domain_error);
  CHECK_THROWS_AS(beta_quantile(1.0, 1.0, 1.2), std::domain_error);
}

TEST_CASE("incomplete beta endpoints are exact") {
  CHECK(reg_inc_beta(3.2, 0.7, 0.0) == 0.0);
  CHECK(reg_inc_beta(3.2, 0.7, 1.0) == 1.0);
  CHECK(beta_quantile(3.2, 0.7, 0.0) == 0.0);
  CHECK(beta_quantile(3.2, 0.7, 1.0) == 1.0);
}

TEST_CASE("uniform closed form: I_x(1,1) = x") {
  for (double x : {0.001, 0.25, 0.5, 0.75, 0.999})
    CHECK(std::fabs(reg_inc_beta(1.0, 1.0, x) - x) <= 1e-10);
  for (double q : {0.01, 0.25, 0.5, 0.77, 0.99})
    CHECK(std::fabs(beta_quantile(1.0, 1.0, q) - q) <= 1e-10);
}

TEST_CASE("Beta(2,1) closed form: I_x = x^2, quantile = sqrt(q)") {
  CHECK(std::fabs(reg_inc_beta(2.0, 1.0, 0.5) - 0.25) <= 1e-10);
  for (double x : {0.1, 0.3, 0.9})
    CHECK(std::fabs(reg_inc_beta(2.0, 1.0, x) - x * x) <= 1e-10);
  CHECK(std::fabs(beta_quantile(2.0, 1.0, 0.25) - 0.5) <= 1e-10);
  for (double q : {0.04, 0.5, 0.81})
    CHECK(std::fabs(beta_quantile(2.0, 1.0, q) - std::sqrt(q)) <= 1e-10);
}

TEST_CASE("symmetric median is exactly one half") {
  CHECK(beta_quantile(0.5, 0.5, 0.5) == 0.5);
  CHECK(beta_quantile(7.3, 7.3, 0.5) == 0.5);
}

TEST_CASE("reflection identity I_x(a,b) = 1 - I_{1-x}(b,a)") {
  drg::RandomStream g(7);
  for (int i = 0; i < 200; ++i) {
    double a = 0.2 + 6.0 * g.uniform();
    double b = 0.2 + 6.0 * g.uniform();
    double x = g.uniform();
    CHECK(std::fabs(reg_inc_beta(a, b, x) - (1.0 - reg_inc_beta(b, a, 1.0 - x))) <= 1e-12);
  }
}

TEST_CASE("CDF is nondecreasing in x") {
  drg::RandomStream g(11);
  for (int i = 0; i < 100; ++i) {
    double a = 0.2 + 10.0 * g.uniform();
    double b = 0.2 + 10.0 * g.uniform();
    double x1 = g.uniform();
    double x2 = g.uniform();
    if (x1 > x2) std::swap(x1, x2);
    CHECK(reg_inc_beta(a, b, x1) <= reg_inc_beta(a, b, x2) + 1e-15);
  }
}

TEST_CASE("quantile is nondecreasing in q, including ulp-adjacent targets") {
  drg::RandomStream g(13);
  for (int i = 0; i < 100; ++i) {
    double a = 0.15 + 20.0 * g.uniform();
    double b = 0.15 + 20.0 * g.uniform();
    double q1 = 0.01 + 0.98 * g.uniform();
    double q2 = 0.01 + 0.98 * g.uniform();
    if (q1 > q2) std::swap(q1, q2);
    CHECK(beta_quantile(a, b, q1) <= beta_quantile(a, b, q2));
    CHECK(beta_quantile(a, b, q1) <= beta_quantile(a, b, std::nextafter(q1, 1.0)));
  }
}

TEST_CASE("quantile/CDF round trip over random shapes") {
  drg::RandomStream g(17);
  int cliff = 0;
  for (int i = 0; i < 2000; ++i) {
    double a = 0.1 + 49.9 * g.uniform();
    double b = 0.1 + 49.9 * g.uniform();
    double q = 0.01 + 0.98 * g.uniform();
    double x = beta_quantile(a, b, q);
    if (std::fabs(reg_inc_beta(a, b, x) - q) <= 1e-8) continue;
    // Residual above tolerance is only acceptable when the CDF steps across
    // q between adjacent doubles: then no representable x can do better and
    // the root is still localized to one ulp.
    ++cliff;
    double below = x > 0.0 ? reg_inc_beta(a, b, std::nextafter(x, 0.0)) : 0.0;
    double above = x < 1.0 ? reg_inc_beta(a, b, std::nextafter(x, 1.0)) : 1.0;
    CHECK(below <= q);
    CHECK(q <= above);
  }
  CHECK(cliff <= 5);  // the ulp cliff is a rare tail-corner event
}

TEST_CASE("integer-shape quantiles match an independent binomial-sum oracle") {
  // Beta(3,7) at the 0.1 / 0.9 deciles, the band used by credible intervals
  // with k = 0.8 at p = 0.3, n = 10.
  const double lo = beta_quantile(3.0, 7.0, 0.1);
  const double hi = beta_quantile(3.0, 7.0, 0.9);
  CHECK(std::fabs(lo - binomial_beta_quantile(3, 7, 0.1L)) <= 1e-9);
  CHECK(std::fabs(hi - binomial_beta_quantile(3, 7, 0.9L)) <= 1e-9);
  // A few more integer pairs across the range.
  CHECK(std::fabs(beta_quantile(2.0, 5.0, 0.25) - binomial_beta_quantile(2, 5, 0.25L)) <= 1e-9);
  CHECK(std::fabs(beta_quantile(6.0, 2.0, 0.75) - binomial_beta_quantile(6, 2, 0.75L)) <= 1e-9);
  CHECK(std::fabs(beta_quantile(4.0, 4.0, 0.33) - binomial_beta_quantile(4, 4, 0.33L)) <= 1e-9);
}

TEST_CASE("tiny shapes return correctly rounded tiny quantiles") {
  // Beta(0.05, 0.95): the 0.1 quantile is around exp(ln(0.1)/0.05) scale;
  // the solver must walk the bracket into the deep subnormal range and the
  // CDF at the returned point must still hit the target.
  double x = beta_quantile(0.05, 0.95, 0.1);
  CHECK(x > 0.0);
  CHECK(x < 1e-15);
  CHECK(std::fabs(reg_inc_beta(0.05, 0.95, x) - 0.1) <= 1e-8);
}
