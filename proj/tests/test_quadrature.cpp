#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "sorteq/quadrature.hpp"

using namespace sorteq;

TEST_CASE("polynomials integrate to machine precision") {
  // K15 is exact through degree 22; spot-check a degree-10 polynomial.
  const auto f = [](double x) {
    const double x2 = x * x;
    return ((3.0 * x2 - 2.0) * x2 + 0.5) * x2 * x2 * x2 + x - 4.0;
  };
  // Exact value of the integral on [-1, 2].
  const auto F = [](double x) {
    const double x2 = x * x;
    return 3.0 * std::pow(x, 11) / 11.0 - 2.0 * std::pow(x, 9) / 9.0 +
           0.5 * std::pow(x, 7) / 7.0 + x2 / 2.0 - 4.0 * x;
  };
  const QuadResult q = integrate(f, -1.0, 2.0, 1e-13, 1e-13);
  CHECK(q.value == doctest::Approx(F(2.0) - F(-1.0)).epsilon(1e-14));
}

TEST_CASE("normal density integrates to one") {
  const auto f = [](double x) { return normal_pdf(x); };
  const QuadResult q = integrate(f, -12.0, 12.0, 1e-13, 1e-13);
  CHECK(q.value == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(q.abs_error < 1e-12);
}

TEST_CASE("sharply peaked integrand triggers adaptive refinement") {
  const double s = 1e-3;
  const auto f = [&](double x) { return normal_pdf(x / s) / s; };
  const QuadResult q = integrate(f, -1.0, 1.0, 1e-12, 1e-12, 200000);
  CHECK(q.value == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("interval budget exhaustion throws") {
  const auto f = [](double x) { return std::cos(500.0 * x); };
  CHECK_THROWS_AS(integrate(f, 0.0, 100.0, 1e-300, 1e-300, 4), std::runtime_error);
}

TEST_CASE("normal cdf matches erf identity") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
  CHECK(normal_cdf(-1.959963984540054) == doctest::Approx(0.025).epsilon(1e-10));
}
