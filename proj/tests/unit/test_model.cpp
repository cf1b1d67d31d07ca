#include "doctest.h"

#include <cmath>

#include "matsim/errors.hpp"
#include "matsim/initial_data.hpp"
#include "matsim/model.hpp"

using namespace matsim;
using namespace matsim::model;

TEST_CASE("example family derived constants") {
  const ModelSpec spec = build_model(example_family(2.0, 4.0, 0.1, 0.2));
  CHECK(spec.tau_max() == doctest::Approx(std::log(5.0)).epsilon(1e-15));
  CHECK(spec.r() == doctest::Approx(std::log(4.0)).epsilon(1e-15));
  CHECK(spec.rho() == doctest::Approx(1.1).epsilon(1e-15));
  CHECK(spec.eta() == doctest::Approx(1.2).epsilon(1e-15));
  CHECK(spec.tau_min() == doctest::Approx(std::log(4.0)).epsilon(1e-15));
}

TEST_CASE("hypothesis violations name the condition") {
  SUBCASE("negative tabulated delay") {
    ModelFamilies f = example_family(2.0, 4.0, 0.1, 0.2);
    f.delay = TabulatedDelay{Profile::tabulated({0.0, 1.0}, {-1.0, -1.0})};
    try {
      build_model(f);
      FAIL("expected a violation");
    } catch (const HypothesisViolation& e) {
      CHECK(e.which() == "tau > 0");
    }
  }
  SUBCASE("kappa below one") {
    try {
      build_model(example_family(0.5, 4.0, 0.1, 0.2));
      FAIL("expected a violation");
    } catch (const HypothesisViolation& e) {
      CHECK(e.which().find("kappa > 1") != std::string::npos);
    }
  }
  SUBCASE("velocity exponent") {
    ModelFamilies f = example_family(2.0, 4.0, 0.1, 0.2);
    f.velocity = PowerLawVelocity{1.0, 0.5};
    CHECK_THROWS_AS(build_model(f), HypothesisViolation);
  }
  SUBCASE("alpha_pi(0) must be one") {
    ModelFamilies f = example_family(2.0, 4.0, 0.1, 0.2);
    f.alpha_pi = Profile::constant(2.0);
    CHECK_THROWS_AS(build_model(f), HypothesisViolation);
  }
  SUBCASE("tau'(m) + 1/V(m) > 0") {
    ModelFamilies f = example_family(2.0, 4.0, 0.1, 0.2);
    f.delay = TabulatedDelay{Profile::tabulated({0.0, 0.5, 1.0}, {10.0, 3.0, 1.0})};
    f.velocity = PowerLawVelocity{10.0, 1.0};
    CHECK_THROWS_AS(build_model(f), HypothesisViolation);
  }
}

TEST_CASE("accepted models satisfy the standing hypotheses on the grid") {
  const ModelSpec spec = build_model(example_family(3.0, 2.5, 0.3, 0.1, 1.5, 0.7, 3.0));
  for (double m : validation_grid()) {
    CHECK(spec.V(m) > 0.0);
    CHECK(spec.tau(m) > 0.0);
    CHECK(spec.g(m) >= 0.0);
    CHECK(spec.g(m) <= m);
    CHECK(spec.beta(m, 0.4) > spec.beta(m, 0.9));
  }
}

TEST_CASE("serialization round-trip is bit-exact") {
  ModelFamilies f = example_family(2.0, 4.0, 0.1, 0.2);
  f.mortality.delta = Profile::tabulated({0.0, 0.3, 1.0}, {0.1, 0.25, 0.4});
  f.velocity = PowerLawVelocity{1.3, 1.7};
  const ModelSpec a = build_model(f);
  const ModelSpec b = ModelSpec::from_json(Json::parse(a.to_json().dump()));
  CHECK(a.tau_max() == b.tau_max());
  CHECK(a.tau_min() == b.tau_min());
  CHECK(a.rho() == b.rho());
  CHECK(a.eta() == b.eta());
  CHECK(a.r() == b.r());
  CHECK(a.to_json().dump() == b.to_json().dump());
}

TEST_CASE("division inverse is extended above g(1)") {
  const ModelSpec spec = build_model(example_family(2.0, 4.0, 0.1, 0.2));
  CHECK(spec.g_inv(0.2) == doctest::Approx(0.4));
  CHECK(spec.g_inv(0.7) == 1.0);
  CHECK(spec.division().inverse_derivative(0.7) == 0.0);
  CHECK(spec.division().inverse_derivative(0.3) == 2.0);

  ModelFamilies f = example_family(2.0, 4.0, 0.1, 0.2);
  f.division = TabulatedDivision{Profile::tabulated({0.0, 0.5, 1.0}, {0.0, 0.2, 0.5})};
  const ModelSpec tab = build_model(f);
  CHECK(tab.g(tab.g_inv(0.3)) == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("compatibility condition") {
  const ModelSpec spec = build_model(example_family(2.0, 4.0, 0.1, 0.2));
  auto data = [&](double mu0, double gamma0) {
    return make_initial_data(spec, Json{{"preset", "constant"}, {"value", mu0}},
                             Json{{"preset", "constant"}, {"value", gamma0}});
  };
  CHECK(check_compatibility(spec, data(0.0, 0.0)).compatible);
  CHECK(check_compatibility(spec, data(1.0, 0.5)).compatible);
  const auto bad = check_compatibility(spec, data(1.0, 0.7));
  CHECK_FALSE(bad.compatible);
  CHECK(bad.lhs == doctest::Approx(0.7));
  CHECK(bad.rhs == doctest::Approx(0.5));
  const auto compat = make_initial_data(spec, Json{{"preset", "constant"}, {"value", 2.0}},
                                        Json{{"preset", "compatible"}});
  CHECK(check_compatibility(spec, compat).compatible);
}

TEST_CASE("initial data presets") {
  const ModelSpec spec = build_model(example_family(2.0, 4.0, 0.1, 0.2));
  const auto d = make_initial_data(spec, Json{{"preset", "zero-below"}, {"b", 0.05}, {"height", 2.0}},
                                   Json{{"preset", "bump"}, {"b", 0.05}, {"height", 0.5}});
  CHECK(d.mu(0.0) == 0.0);
  CHECK(d.mu(0.05) == 0.0);
  CHECK(d.mu(1.0) == doctest::Approx(2.0));
  CHECK(d.Gamma(0.03, 1.0) == 0.0);
  CHECK(d.Gamma(0.525, 0.3) == doctest::Approx(0.5));
  CHECK_THROWS_AS(make_initial_data(spec, Json{{"preset", "constant"}, {"value", -1.0}},
                                    Json{{"preset", "constant"}, {"value", 0.0}}),
                  HypothesisViolation);
  CHECK_THROWS_AS(make_initial_data(spec, Json{{"preset", "constant"}, {"valu", 1.0}},
                                    Json{{"preset", "constant"}, {"value", 0.0}}),
                  ConfigError);
}
