#ifndef MATSIM_NUMERICS_HPP
#define MATSIM_NUMERICS_HPP

#include <array>
#include <cmath>
#include <functional>
#include <string_view>

namespace matsim::numerics {

/// Adaptive Gauss–Kronrod (7/15) quadrature of `f` over [a, b].
///
/// Succeeds when the estimated error is below `rel_tol * |I|` or below
/// `abs_floor`; otherwise throws QuadratureFailure naming `what`.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol, double abs_floor = 1e-300,
                 std::string_view what = "integral");

/// Fixed 5-point Gauss–Legendre rule on [a, b].
template <class F>
double gauss_legendre5(F&& f, double a, double b) {
  static constexpr std::array<double, 5> nodes = {
      -0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
      0.9061798459386640};
  static constexpr std::array<double, 5> weights = {
      0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
      0.4786286704993665, 0.2369268850561891};
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    sum += weights[i] * f(mid + half * nodes[i]);
  }
  return half * sum;
}

struct RootResult {
  double root;
  int iterations;
};

/// Safeguarded Newton on a bracket [lo, hi] where `f(lo)` and `f(hi)` have
/// opposite signs. `fdf` returns {f(x), f'(x)}. Stops when the bracket or the
/// step is below `x_tol`. Throws RootNotBracketed if the signs agree.
RootResult safe_newton(const std::function<std::array<double, 2>(double)>& fdf,
                       double lo, double hi, double x_tol, int max_iter = 200);

/// Plain bisection with the same contract, for non-differentiable targets.
RootResult bisect(const std::function<double(double)>& f, double lo, double hi,
                  double x_tol, int max_iter = 400);

}  // namespace matsim::numerics

#endif  // MATSIM_NUMERICS_HPP
