#include "doctest.h"

#include <cmath>

#include "matsim/characteristics.hpp"
#include "matsim/errors.hpp"
#include "matsim/immature.hpp"
#include "matsim/numerics.hpp"

using namespace matsim;
using namespace matsim::immature;

namespace {

ImmatureParams example_params() {
  static const auto spec = model::build_model(model::example_family(2.0, 4.0, 0.1, 0.2));
  static const chars::CharTables tables(spec);
  return ImmatureParams::from_model(tables);
}

}  // namespace

TEST_CASE("parameters of the worked example") {
  const auto p = example_params();
  CHECK(p.rho == doctest::Approx(1.1));
  CHECK(p.eta == doctest::Approx(1.2));
  CHECK(p.r == doctest::Approx(std::log(4.0)));
  CHECK(p.xi_bar0 == doctest::Approx(0.37892914162759955).epsilon(1e-13));
  CHECK(p.xi0(p.r) == doctest::Approx(p.xi_bar0).epsilon(1e-14));
}

TEST_CASE("zero data give the trivial solution") {
  const auto p = example_params();
  const auto tr = solve(p, 0.0, [](double) { return 0.0; }, 10.0 * p.r);
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    CHECK(tr.xs[i] == 0.0);
    CHECK(tr.ys[i] == 0.0);
  }
}

TEST_CASE("linear initial phase without re-entry") {
  ImmatureParams p;
  p.rho = 1.0;
  p.eta = 0.5;
  p.r = 1.3;
  p.hill = Hill{0.0, 1.0, 2.0};
  p.xi_scale = 2.0;
  p.xi_bar0 = 2.0 * std::exp(-0.5 * 1.3);
  p.pi_bar0 = std::exp(-0.5 * 1.3);
  const auto tr = solve_initial_phase(p, 1.7, [](double) { return 0.0; });
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    CHECK(tr.xs[i] == doctest::Approx(1.7 * std::exp(-tr.times[i])).epsilon(1e-9));
  }
}

TEST_CASE("explicit y agrees with the integrated y") {
  const auto p = example_params();
  const auto tr = solve(p, 0.8, [](double a) { return 0.3 + 0.1 * a; }, 8.0 * p.r);
  for (std::size_t k = 1; k < tr.segments().size(); ++k) {
    for (const auto& knot : tr.segments()[k]) {
      CHECK(std::abs(tr.y(knot.t) - knot.y_ode) <= 1e-7);
    }
  }
  for (double v : tr.xs) CHECK(v >= 0.0);
  for (double v : tr.ys) CHECK(v >= 0.0);
}

TEST_CASE("asymptotic y") {
  ImmatureParams p;
  p.hill = Hill{1.0, 1.0, 2.0};
  p.eta = 0.0;
  p.r = 2.0;
  CHECK(asymptotic_y(p, 0.0) == 0.0);
  CHECK(asymptotic_y(p, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  p.eta = 0.5;
  p.r = std::log(4.0);
  CHECK(asymptotic_y(p, 2.0) == doctest::Approx(0.4).epsilon(1e-14));
}

TEST_CASE("Lyapunov functional and rate") {
  auto p = example_params();
  CHECK(lyapunov_J(p, [](double) { return 0.0; }) == 0.0);
  CHECK(lyapunov_rate(p, 0.0) == 0.0);
  CHECK(lyapunov_J(p, [](double) { return 1.0; }) == doctest::Approx(0.47790042335555805).epsilon(1e-12));
  for (double u : {1e-3, 0.5, 3.0, 40.0}) CHECK(lyapunov_rate(p, u) > 0.0);
  Hill h3{1.3, 0.7, 3.0};
  CHECK(h3.F(1.1) == doctest::Approx(
                         numerics::integrate([&](double s) { return h3.f(s); }, 0.0, 1.1, 1e-13)));
  Hill h1{1.3, 0.7, 1.0};
  CHECK(h1.F(1.1) == doctest::Approx(
                         numerics::integrate([&](double s) { return h1.f(s); }, 0.0, 1.1, 1e-13)));
}

TEST_CASE("Lyapunov descent along a stable trajectory") {
  const auto p = example_params();
  const auto tr = solve(p, 1.5, [](double a) { return 0.6 + 0.2 * std::sin(a); }, 12.0 * p.r);
  double prev = lyapunov_J(p, tr, p.r);
  for (double t = p.r + 0.05; t <= 12.0 * p.r; t += 0.05) {
    const double J = lyapunov_J(p, tr, t);
    CHECK(J <= prev + 1e-9);
    prev = J;
  }
}

TEST_CASE("classification") {
  auto p = example_params();
  auto c = classify_stability(p);
  CHECK(c.verdict == Verdict::GloballyStable);
  CHECK(c.margin == doctest::Approx(1.342141716744801).epsilon(1e-12));

  ImmatureParams u;
  u.rho = 1.0;
  u.xi_bar0 = 4.0 / 4.5;
  u.hill = Hill{2.0, 1.0, 2.0};
  u.r = std::log(4.5);
  c = classify_stability(u);
  CHECK(c.verdict == Verdict::Unstable);
  CHECK(c.margin == doctest::Approx(1.0 - (8.0 / 4.5 - 1.0) * 2.0).epsilon(1e-14));
  CHECK(characteristic_root(u) > 0.0);
  CHECK(characteristic_root(p) < 0.0);

  ImmatureParams half = p;
  half.xi_bar0 = 0.5;
  c = classify_stability(half);
  CHECK(c.verdict == Verdict::GloballyStable);
  CHECK(c.margin == doctest::Approx(half.rho));

  ImmatureParams crit;
  crit.rho = 0.0;
  crit.xi_bar0 = 0.5;
  crit.hill = Hill{1.3, 1.0, 2.0};
  crit.r = 0.9;
  CHECK(std::abs(characteristic_root(crit)) < 1e-12);
}

TEST_CASE("characteristic root against the real-root equation") {
  ImmatureParams q;
  q.rho = 0.3;
  q.xi_bar0 = 1.4;
  q.hill = Hill{0.8, 1.0, 2.0};
  q.r = 2.0;
  const double l = characteristic_root(q);
  const double a = 0.3 + 0.8;
  const double b = 2.0 * 1.4 * 0.8;
  CHECK(l + a - b * std::exp(-l * 2.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("unbounded scenario preconditions") {
  ImmatureParams p;
  p.rho = 0.0;
  p.eta = 0.0;
  p.r = std::log(4.0);
  p.hill = Hill{1.0, 1.0, 2.0};
  p.xi_scale = 4.0;
  p.xi_bar0 = 4.0;
  CHECK(p.hill.x_bar() == doctest::Approx(1.0));
  CHECK(unbounded_scenario_check(p, 2.0, [](double) { return 0.4; }).applies);
  CHECK_FALSE(unbounded_scenario_check(p, 2.0, [](double) { return 0.0; }).applies);
  ImmatureParams q = p;
  q.rho = 0.1;
  CHECK_FALSE(unbounded_scenario_check(q, 2.0, [](double) { return 0.4; }).applies);
}

TEST_CASE("compatibility flags the derivative jump at r") {
  const auto p = example_params();
  const double mu0 = 1.0;
  const auto smooth = solve(p, mu0, [](double) { return 0.5; }, 2.0 * p.r);
  const auto jump = solve(p, mu0, [](double) { return 0.7; }, 2.0 * p.r);
  CHECK_FALSE(smooth.derivative_jump_at_r);
  CHECK(jump.derivative_jump_at_r);
  const double e = 1e-4;
  auto one_sided = [&](const Trajectory& tr) {
    const double left = (tr.x(p.r) - tr.x(p.r - e)) / e;
    const double right = (tr.x(p.r + e) - tr.x(p.r)) / e;
    return std::abs(left - right);
  };
  CHECK(one_sided(smooth) < 1e-3);
  CHECK(one_sided(jump) > 0.1);
}

TEST_CASE("Hill primitive for a non-integer exponent") {
  // mpmath quad, 30 digits
  const immature::Hill h{1.0, 0.37, 2.63};
  const std::vector<std::pair<double, double>> ref = {
      {1e-3, 4.99999961976820836700056717031e-07}, {1e-2, 4.99983780865488759780755080252e-05},
      {0.1, 0.00493219034387526136388938715685},   {0.37, 0.0499262242045457515192410729866},
      {1.0, 0.12467974591058860667284270044},      {3.0, 0.181163222469579004864154301953},
      {10.0, 0.212025406692189432825792933362}};
  for (const auto& [x, F] : ref) CHECK(h.F(x) == doctest::Approx(F).epsilon(1e-13));
}
