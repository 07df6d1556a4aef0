#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "p2l/bounds.hpp"

using namespace p2l::bounds;

namespace {

// Naive long-double sum of the binomial-ratio series, used as an oracle.
long double naive_psi(std::size_t k, std::size_t n, long double delta, long double eps) {
  long double sum = 0.0L;
  for (std::size_t m = k; m < n; ++m) {
    long double ratio = 1.0L;  // C(m,k)/C(n,k) = prod_{i<k} (m-i)/(n-i)
    for (std::size_t i = 0; i < k; ++i)
      ratio *= static_cast<long double>(m - i) / static_cast<long double>(n - i);
    sum += ratio * std::pow(1.0L - eps, -static_cast<long double>(n - m));
  }
  return delta / static_cast<long double>(n) * sum;
}

// Root of naive_psi = 1 by plain bisection in long double.
double naive_root(std::size_t k, std::size_t n, double delta) {
  long double lo = static_cast<long double>(k) / n, hi = 1.0L;
  for (int i = 0; i < 200; ++i) {
    const long double mid = 0.5L * (lo + hi);
    if (naive_psi(k, n, delta, mid) > 1.0L) hi = mid;
    else lo = mid;
  }
  return static_cast<double>(0.5L * (lo + hi));
}

}  // namespace

TEST_CASE("psi matches hand evaluations") {
  CHECK(psi_value({0, 1, 0.5}, 0.5) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(psi_value({1, 2, 0.2}, 0.5) == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("psi is increasing and blows up near one") {
  const BoundQuery q{3, 40, 0.05};
  double prev = 0.0;
  for (double e = 0.01; e < 0.999; e += 0.01) {
    const double v = psi_value(q, e);
    CHECK(v > prev);
    prev = v;
  }
  CHECK(psi_value(q, 1.0 - 1e-9) > 1e100);
}

TEST_CASE("psi agrees with a long-double series") {
  for (std::size_t n : {5u, 30u, 200u})
    for (std::size_t k : {0u, 1u, 4u})
      for (double e : {0.05, 0.2, 0.6}) {
        const double ref = static_cast<double>(naive_psi(k, n, 0.01, e));
        CHECK(psi_value({k, n, 0.01}, e) == doctest::Approx(ref).epsilon(1e-11));
      }
}

TEST_CASE("eps_bar special values") {
  CHECK(eps_bar({500, 500, 0.01}).eps == 1.0);
  CHECK(eps_bar({0, 1, 0.1}).eps == doctest::Approx(0.9).epsilon(1e-9));
  CHECK(eps_bar_oracle({0, 1, 0.1}).eps == doctest::Approx(0.9).epsilon(1e-9));
  // Quadratic in y = 1/(1-eps): y^2 + y = 4, so eps = 1 - 2/(sqrt(17) - 1).
  const double exact = 1.0 - 2.0 / (std::sqrt(17.0) - 1.0);
  CHECK(std::abs(eps_bar({0, 2, 0.5}).eps - exact) < 1e-9);
  CHECK(std::abs(eps_bar_oracle({0, 2, 0.5}).eps - exact) < 1e-9);
}

TEST_CASE("eps_bar matches independent root finders") {
  const auto r = eps_bar({5, 500, 0.01});
  CHECK(r.eps >= 0.01);
  CHECK(r.eps <= 1.0);
  CHECK(std::abs(r.eps - eps_bar_oracle({5, 500, 0.01}).eps) <= 1e-7);
  for (std::size_t n : {10u, 60u, 300u})
    for (std::size_t k : {0u, 2u, 9u})
      for (double d : {1e-2, 1e-5}) {
        const double ref = naive_root(k, n, d);
        CHECK(std::abs(eps_bar({k, n, d}).eps - ref) < 1e-8);
      }
}

TEST_CASE("eps_bar lies in [k/N, 1] and grows with k") {
  for (std::size_t n : {1u, 7u, 100u, 1000u}) {
    double prev = 0.0;
    for (std::size_t k = 0; k <= n; k += std::max<std::size_t>(1, n / 25)) {
      const double e = eps_bar({k, n, 1e-3}).eps;
      CHECK(e >= static_cast<double>(k) / n);
      CHECK(e <= 1.0);
      CHECK(e >= prev);
      prev = e;
    }
  }
}

TEST_CASE("invalid bound queries throw") {
  CHECK_THROWS_AS(eps_bar({3, 2, 0.1}), std::domain_error);
  CHECK_THROWS_AS(eps_bar({0, 0, 0.1}), std::domain_error);
  CHECK_THROWS_AS(eps_bar({0, 5, 0.0}), std::domain_error);
  CHECK_THROWS_AS(eps_bar({0, 5, 1.0}), std::domain_error);
  CHECK_THROWS_AS(binomial_tail_inversion(6, 5, 0.1), std::domain_error);
  CHECK_THROWS_AS(conformal_eps(0, 5, 0.1), std::domain_error);
}

TEST_CASE("incomplete beta closed forms") {
  // I_x(1, b) = 1 - (1-x)^b and I_x(a, 1) = x^a.
  for (double x : {0.01, 0.3, 0.77, 0.99}) {
    CHECK(incomplete_beta(1.0, 7.0, x) == doctest::Approx(1.0 - std::pow(1.0 - x, 7.0)).epsilon(1e-12));
    CHECK(incomplete_beta(4.0, 1.0, x) == doctest::Approx(std::pow(x, 4.0)).epsilon(1e-12));
    CHECK(incomplete_beta(0.0, 3.0, x) == 1.0);
  }
  CHECK(incomplete_beta(2.5, 2.5, 0.5) == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("binomial tail inversion") {
  CHECK(binomial_tail_inversion(0, 100, 0.01) == doctest::Approx(1.0 - std::pow(0.01, 0.01)).epsilon(1e-12));
  CHECK(std::abs(binomial_tail_inversion(0, 100, 0.01) - 0.045007) < 1e-6);
  CHECK(binomial_tail_inversion(50, 50, 0.05) == 1.0);

  // Grid scan: the first p on a 1e-6 grid where P[Bin(50, p) <= 2] drops to delta.
  auto cdf2 = [](double p) {
    const double q = 1.0 - p;
    return std::pow(q, 50) + 50 * p * std::pow(q, 49) + 1225 * p * p * std::pow(q, 48);
  };
  double scan = 0.0;
  for (int i = 1; i <= 1000000; ++i) {
    const double p = i * 1e-6;
    if (cdf2(p) <= 0.05) {
      scan = p;
      break;
    }
  }
  const double e = binomial_tail_inversion(2, 50, 0.05);
  CHECK(std::abs(e - scan) <= 1e-6);
  CHECK(binomial_cdf(2, 50, e) == doctest::Approx(0.05).epsilon(1e-9));
}

TEST_CASE("conformal bound is the index-substituted test-set bound") {
  CHECK(conformal_eps(100, 100, 0.01) == doctest::Approx(1.0 - std::pow(0.01, 0.01)).epsilon(1e-12));
  for (std::size_t n : {10u, 50u, 333u})
    for (std::size_t k = 1; k <= n; k += 7)
      CHECK(conformal_eps(k, n, 0.05) == binomial_tail_inversion(n - k, n, 0.05));
  // k = 1 keeps only the smallest score: P[Bin(50, e) <= 49] = 0.05 gives e = 0.95^(1/50).
  CHECK(conformal_eps(1, 50, 0.05) == doctest::Approx(std::pow(0.95, 1.0 / 50.0)).epsilon(1e-10));
}

TEST_CASE("union delta") {
  CHECK(union_delta(0.1, 10) == doctest::Approx(0.01));
  CHECK(union_delta(0.03, 1) == 0.03);
  CHECK(union_delta(0.5, 2) == 0.25);
  CHECK_THROWS(union_delta(0.1, 0));
}
