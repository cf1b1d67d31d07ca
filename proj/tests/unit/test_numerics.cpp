#include "doctest.h"

#include <cmath>
#include <vector>

#include "matsim/errors.hpp"
#include "matsim/monotone_cubic.hpp"
#include "matsim/numerics.hpp"

using namespace matsim;

TEST_CASE("monotone cubic reproduces knots and holds ends") {
  MonotoneCubic f({0.0, 0.5, 1.0, 2.0}, {0.0, 1.0, 1.5, 4.0});
  CHECK(f(0.5) == 1.0);
  CHECK(f(2.0) == 4.0);
  CHECK(f(-1.0) == 0.0);
  CHECK(f(3.0) == 4.0);
  double prev = f(0.0);
  for (int i = 1; i <= 200; ++i) {
    const double v = f(i * 0.01);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("monotone cubic is exactly zero between zero samples") {
  MonotoneCubic f({0.0, 0.1, 0.2, 0.3, 0.4}, {0.0, 0.0, 0.0, 0.7, 0.2});
  for (int i = 0; i <= 100; ++i) CHECK(f(0.002 * i) == 0.0);
  std::vector<double> y{0.0, 0.0, 0.0, 1.0, 3.0};
  std::vector<double> d(y.size());
  monotone_slopes_uniform(0.1, y, d);
  CHECK(d[0] == 0.0);
  CHECK(d[1] == 0.0);
  CHECK(d[2] == 0.0);
}

TEST_CASE("monotone cubic is exact for linear data") {
  MonotoneCubic f({0.0, 0.3, 0.5, 1.0}, {1.0, 1.6, 2.0, 3.0});
  CHECK(f(0.77) == doctest::Approx(2.54).epsilon(1e-14));
  CHECK(f.derivative(0.2) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("adaptive quadrature") {
  const double v = numerics::integrate([](double x) { return std::exp(-x); }, 0.0, 3.0, 1e-12);
  CHECK(v == doctest::Approx(1.0 - std::exp(-3.0)).epsilon(1e-13));
  CHECK(numerics::integrate([](double) { return 1.0; }, 2.0, 2.0, 1e-12) == 0.0);
}

TEST_CASE("gauss-legendre 5 integrates degree-9 polynomials exactly") {
  const double v = numerics::gauss_legendre5([](double x) { return std::pow(x, 9) + x * x; }, 0.0, 2.0);
  CHECK(v == doctest::Approx(102.4 + 8.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("safeguarded newton and bisection") {
  auto fdf = [](double x) -> std::array<double, 2> { return {x * x - 2.0, 2.0 * x}; };
  CHECK(numerics::safe_newton(fdf, 0.0, 2.0, 1e-15).root == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(numerics::safe_newton(fdf, 2.0, 0.0, 1e-15).root == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(numerics::safe_newton(fdf, 2.0, 3.0, 1e-12), RootNotBracketed);
  auto f = [](double x) { return std::cos(x) - x; };
  CHECK(numerics::bisect(f, 0.0, 1.0, 1e-14).root == doctest::Approx(0.7390851332151607).epsilon(1e-13));
}
