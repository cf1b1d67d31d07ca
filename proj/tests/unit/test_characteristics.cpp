#include "doctest.h"

#include <cmath>
#include <vector>

#include "matsim/characteristics.hpp"
#include "matsim/errors.hpp"

using namespace matsim;
using namespace matsim::chars;
using model::build_model;
using model::example_family;

namespace {

double theta_closed(double m, double alpha) { return 0.5 * (std::sqrt(alpha * alpha + 4.0 * m) - alpha); }
double delta_closed(double m, double kappa, double alpha) {
  return 0.5 * (std::sqrt(4.0 * kappa * std::min(m, 1.0 / kappa) + alpha * alpha) - alpha);
}

// ln h(m) = -int_m^1 ds/V(s) by composite Simpson in u = ln s.
double log_h_simpson(const model::ModelSpec& spec, double m) {
  const int n = 20000;
  const double a = std::log(m);
  const double step = -a / n;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double s = std::exp(a + i * step);
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * s / spec.V(s);
  }
  return -sum * step / 3.0;
}

}  // namespace

TEST_CASE("h and chi for V(m) = m") {
  const auto spec = build_model(example_family(2.0, 4.0, 0.1, 0.2));
  const CharTables t(spec);
  CHECK(t.h(0.25) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(t.h(1.0) == 1.0);
  CHECK(t.h(0.0) == 0.0);
  CHECK(t.chi(-1.0, 0.5) == doctest::Approx(0.18393972058572117).epsilon(1e-14));
  CHECK(t.chi(0.0, 0.37) == 0.37);
  CHECK(t.chi(-2.0, 0.0) == 0.0);
}

TEST_CASE("theta, delta and delta_inv closed forms") {
  const auto spec = build_model(example_family(2.0, 4.0, 0.1, 0.2));
  const CharTables t(spec);
  CHECK(t.theta(1.0) == doctest::Approx(0.2360679774997898).epsilon(1e-12));
  CHECK(t.theta(0.5) == doctest::Approx(0.12132034355964239).epsilon(1e-12));
  CHECK(t.delta(0.5) == doctest::Approx(0.2360679774997898).epsilon(1e-12));
  CHECK(t.delta(0.75) == doctest::Approx(0.2360679774997898).epsilon(1e-12));
  CHECK(t.delta_inv(0.1) == doctest::Approx(0.205).epsilon(1e-14));
  CHECK_THROWS_AS(t.delta_inv(0.3), DomainError);
  for (double m : model::validation_grid()) {
    CHECK(std::abs(t.theta(m) - theta_closed(m, 4.0)) <= 1e-10 * std::max(1.0, m));
    CHECK(std::abs(t.delta(m) - delta_closed(m, 2.0, 4.0)) <= 1e-10);
    CHECK(std::abs(t.theta(m) - t.chi(-spec.tau(t.theta(m)), m)) <= 1e-10);
  }
}

TEST_CASE("theta for constant delay") {
  auto f = example_family(2.0, 4.0, 0.1, 0.2);
  f.delay = model::ConstantDelay{0.7};
  const auto spec = build_model(f);
  const CharTables t(spec);
  for (double m : {1e-5, 0.1, 0.6, 1.0}) {
    CHECK(t.theta(m) == doctest::Approx(m * std::exp(-0.7)).epsilon(1e-12));
  }
}

TEST_CASE("power law p > 1 against direct quadrature") {
  auto f = example_family(2.0, 4.0, 0.1, 0.2);
  f.velocity = model::PowerLawVelocity{0.8, 2.0};
  const auto spec = build_model(f);
  const CharTables t(spec);
  for (double m : {0.05, 0.2, 0.5, 0.9}) {
    CHECK(t.log_h(m) == doctest::Approx(log_h_simpson(spec, m)).epsilon(1e-9));
    CHECK(t.h(m) < 1.0);
    CHECK(t.h_inv(t.h(m)) == doctest::Approx(m).epsilon(1e-12));
  }
  // semigroup property
  for (double m : {0.1, 0.7}) {
    CHECK(t.chi(-0.3, t.chi(-0.4, m)) == doctest::Approx(t.chi(-0.7, m)).epsilon(1e-12));
  }
}

TEST_CASE("tabulated velocity reproduces the linear closed forms") {
  auto f = example_family(2.0, 4.0, 0.1, 0.2);
  f.velocity = model::TabulatedVelocity{model::Profile::tabulated({0.0, 0.25, 0.5, 1.0}, {0.0, 0.25, 0.5, 1.0})};
  const auto spec = build_model(f);
  const CharTables t(spec);
  for (double m : {1e-14, 1e-9, 1e-3, 0.3, 0.8}) {
    CHECK(t.h(m) == doctest::Approx(m).epsilon(1e-9));
    CHECK(t.h_inv(m) == doctest::Approx(m).epsilon(1e-9));
  }
  CHECK(t.theta(1.0) == doctest::Approx(0.2360679774997898).epsilon(1e-9));
  CHECK(t.kernel_K(1.3, 0.4) == doctest::Approx(std::exp(-1.1 * 1.3)).epsilon(1e-9));
}

TEST_CASE("survival kernels") {
  const auto spec = build_model(example_family(2.0, 4.0, 0.1, 0.2));
  const CharTables t(spec);
  CHECK(t.kernel_K(1.7, 0.3) == doctest::Approx(std::exp(-1.1 * 1.7)).epsilon(1e-14));
  CHECK(t.kernel_K(0.0, 0.3) == 1.0);
  CHECK(t.kernel_H(2.0, 0.5) == doctest::Approx(0.09071795328941251).epsilon(1e-14));
  CHECK(t.xi_bar(0.0) == doctest::Approx(0.37892914162759955).epsilon(1e-13));
  CHECK(t.xi(1.0, 0.6) == 0.0);
  CHECK(t.pi(0.0, 0.4) == 1.0);
  CHECK(t.xi_bar(0.25) == doctest::Approx(0.3655832995727863).epsilon(1e-12));

  // non-constant mortality: quadrature against a constant-rate bracket
  auto f = example_family(2.0, 4.0, 0.1, 0.2);
  f.mortality.delta = model::Profile::tabulated({0.0, 1.0}, {0.1, 0.5});
  const auto spec2 = build_model(f);
  const CharTables t2(spec2);
  // delta(m) = 0.1 + 0.4 m along chi(-s,m) = m e^{-s}: int = 0.1 t + 0.4 m (1 - e^{-t})
  const double m = 0.8;
  const double tt = 1.5;
  CHECK(t2.kernel_K(tt, m) ==
        doctest::Approx(std::exp(-(0.1 * tt + 0.4 * m * (1.0 - std::exp(-tt))) - tt)).epsilon(1e-10));
  for (double s : {0.0, 0.5, 3.0}) {
    for (double mm : {0.0, 0.2, 1.0}) {
      CHECK(t2.kernel_K(s, mm) > 0.0);
      CHECK(t2.kernel_K(s, mm) <= 1.0);
    }
  }
}

TEST_CASE("propagation schedule") {
  const auto spec = build_model(example_family(2.0, 4.0, 0.1, 0.2));
  const CharTables t(spec);
  const auto s = t.schedule(0.05);
  CHECK(s.N == 3);
  const std::vector<double> expected{0.025, 0.05031250000000001, 0.10189067382812503, 0.20897220236282474,
                                     0.43977909540583415, 0.5};
  REQUIRE(s.b_seq.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(s.b_seq[i] == doctest::Approx(expected[i]).epsilon(1e-12));
  }
  CHECK(s.t_bar == doctest::Approx(std::log(20.0) + 5.0 * std::log(5.0)).epsilon(1e-13));
  CHECK(s.t_full == doctest::Approx(6.0 * std::log(5.0) - std::log(0.025)).epsilon(1e-13));
  CHECK(s.t_full - s.t_bar == doctest::Approx(spec.tau_max() - std::log(0.5)).epsilon(1e-14));

  const auto edge = t.schedule(0.6);
  CHECK(edge.N == 0);
  CHECK(edge.b_seq.size() == 3);
  CHECK(edge.b_seq[1] == 0.5);
}

TEST_CASE("delta strictness agrees with the sign of alpha - kappa") {
  for (double kappa : {1.5, 2.0, 3.0, 4.0}) {
    for (double alpha : {1.2, 2.0, 3.0, 4.0, 5.5}) {
      const auto spec = build_model(example_family(kappa, alpha, 0.1, 0.2));
      const CharTables t(spec);
      const auto r = check_delta_strict(t);
      CHECK(r.holds == (alpha > kappa));
      if (alpha < kappa) {
        REQUIRE(r.witness.has_value());
        CHECK(t.delta(*r.witness) >= *r.witness);
      }
    }
  }
}
