#include "matsim/numerics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <string>

#include "matsim/errors.hpp"

namespace matsim::numerics {

double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol, double abs_floor, std::string_view what) {
  if (a == b) return 0.0;
  double error = 0.0;
  double l1 = 0.0;
  // Boost stops on per-interval estimates whose sum can exceed rel_tol
  const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, a, b, 20, 0.25 * rel_tol, &error, &l1);
  if (!std::isfinite(value) || (error > rel_tol * l1 && error > abs_floor)) {
    throw QuadratureFailure(std::string(what) + ": tolerance unreachable (estimate " +
                            std::to_string(error) + ")");
  }
  return value;
}

RootResult safe_newton(const std::function<std::array<double, 2>(double)>& fdf,
                       double lo, double hi, double x_tol, int max_iter) {
  double flo = fdf(lo)[0];
  double fhi = fdf(hi)[0];
  if (flo == 0.0) return {lo, 0};
  if (fhi == 0.0) return {hi, 0};
  if ((flo > 0.0) == (fhi > 0.0)) {
    throw RootNotBracketed("safe_newton: f has the same sign at both ends");
  }
  // orient so that f(lo) < 0
  if (flo > 0.0) std::swap(lo, hi);
  double x = 0.5 * (lo + hi);
  double dx_old = std::abs(hi - lo);
  double dx = dx_old;
  auto v = fdf(x);
  double fx = v[0];
  double dfx = v[1];
  for (int it = 1; it <= max_iter; ++it) {
    const bool out_of_bracket = ((x - hi) * dfx - fx) * ((x - lo) * dfx - fx) > 0.0;
    const bool too_slow = std::abs(2.0 * fx) > std::abs(dx_old * dfx);
    dx_old = dx;
    if (out_of_bracket || too_slow || dfx == 0.0) {
      dx = 0.5 * (hi - lo);
      x = lo + dx;
    } else {
      dx = fx / dfx;
      x -= dx;
    }
    if (std::abs(dx) < x_tol) return {x, it};
    v = fdf(x);
    fx = v[0];
    dfx = v[1];
    if (fx == 0.0) return {x, it};
    if (fx < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    if (std::abs(hi - lo) < x_tol) return {x, it};
  }
  return {x, max_iter};
}

RootResult bisect(const std::function<double(double)>& f, double lo, double hi,
                  double x_tol, int max_iter) {
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return {lo, 0};
  if (fhi == 0.0) return {hi, 0};
  if ((flo > 0.0) == (fhi > 0.0)) {
    throw RootNotBracketed("bisect: f has the same sign at both ends");
  }
  int it = 0;
  while (std::abs(hi - lo) > x_tol && it < max_iter) {
    ++it;
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return {mid, it};
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return {0.5 * (lo + hi), it};
}

}  // namespace matsim::numerics
