#include "doctest.h"

#include <cmath>

#include "matsim/analysis.hpp"
#include "matsim/errors.hpp"

using namespace matsim;
using namespace matsim::analysis;

namespace {

struct Setup {
  model::ModelSpec spec;
  chars::CharTables tables;
  explicit Setup(model::ModelFamilies f) : spec(model::build_model(std::move(f))), tables(spec) {}
};

}  // namespace

TEST_CASE("local criterion of the worked example") {
  Setup s(model::example_family(2.0, 4.0, 0.1, 0.2));
  const auto c = local_criterion(s.tables);
  CHECK(c.sup_xi == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(c.lhs == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(c.rhs == doctest::Approx(1.1).epsilon(1e-12));
  CHECK_FALSE(c.holds);
}

TEST_CASE("no re-entry always satisfies the local criterion") {
  Setup s(model::example_family(2.0, 4.0, 0.1, 0.2, 0.0));
  const auto c = local_criterion(s.tables);
  CHECK(c.lhs == 0.0);
  CHECK(c.holds);
}

TEST_CASE("overall classification") {
  Setup stable(model::example_family(2.0, 4.0, 6.0, 6.0));
  const auto a = classify(stable.tables);
  CHECK(a.local.lhs == doctest::Approx(5.0));
  CHECK(a.local.rhs == doctest::Approx(7.0));
  CHECK(a.overall == Overall::GloballyExpStable);

  Setup unstable(model::example_family(4.0, 4.5, 0.0, 0.0, 2.0));
  const auto b = classify(unstable.tables);
  CHECK(b.immature.margin == doctest::Approx(-5.0 / 9.0).epsilon(1e-12));
  CHECK(b.overall == Overall::Unstable);
  CHECK(b.characteristic_root > 0.0);

  Setup mixed(model::example_family(2.0, 4.0, 0.1, 0.2));
  const auto c = classify(mixed.tables, 0.05);
  CHECK(c.immature.margin == doctest::Approx(1.342141716744801).epsilon(1e-12));
  CHECK(c.overall == Overall::ImmatureStableOnly);
  REQUIRE(c.schedule);
  CHECK(c.schedule->t_full == doctest::Approx(13.345506928718537).epsilon(1e-12));
  CHECK(to_json(c)["verdict"] == "ImmatureStableOnly");
}

TEST_CASE("scaling beta0 down never turns a stable verdict unstable") {
  for (double b0 : {1.0, 0.5, 0.25, 0.0}) {
    Setup s(model::example_family(2.0, 4.0, 6.0, 6.0, b0));
    CHECK(classify(s.tables).overall == Overall::GloballyExpStable);
  }
}

TEST_CASE("twin runs with identical data do not differ") {
  Setup s(model::example_family(2.0, 4.0, 0.1, 0.2));
  const auto d = model::make_initial_data(
      s.spec, {{"preset", "bump"}, {"b", 0.05}, {"height", 1.0}, {"offset", 0.3}},
      {{"preset", "compatible"}});
  solver::GridParams g;
  g.dt = 0.08;
  const auto out = dependence_experiment(s.tables, d, d, 0.05, 0.0, 0.0, g, {1.0, 5.0}, 5.0);
  REQUIRE(out.rows.size() == 2);
  for (const auto& r : out.rows) {
    CHECK(r.diff_all == 0.0);
    CHECK(r.diff_P == 0.0);
  }
  CHECK(out.pass());
}

TEST_CASE("twin data must coincide below b") {
  Setup s(model::example_family(2.0, 4.0, 0.1, 0.2));
  const auto d1 = model::make_initial_data(s.spec, {{"preset", "constant"}, {"value", 1.0}},
                                           {{"preset", "compatible"}});
  const auto d2 = model::make_initial_data(s.spec, {{"preset", "constant"}, {"value", 1.1}},
                                           {{"preset", "compatible"}});
  CHECK_THROWS_AS(dependence_experiment(s.tables, d1, d2, 0.05, 1e-6, 1e-6), PreconditionViolated);
}

TEST_CASE("zero data are extinct at once") {
  Setup s(model::example_family(2.0, 4.0, 0.1, 0.2));
  const auto d = model::make_initial_data(s.spec, {{"preset", "constant"}, {"value", 0.0}},
                                          {{"preset", "constant"}, {"value", 0.0}});
  solver::GridParams g;
  g.dt = 0.08;
  const auto e = extinction_experiment(s.tables, d, 0.05, g);
  REQUIRE(e.extinct_by);
  CHECK(*e.extinct_by == 0.0);
  CHECK(e.pass);
}

TEST_CASE("extinction needs data vanishing below b") {
  Setup s(model::example_family(2.0, 4.0, 0.1, 0.2));
  const auto d = model::make_initial_data(s.spec, {{"preset", "constant"}, {"value", 0.1}},
                                          {{"preset", "compatible"}});
  CHECK_THROWS_AS(extinction_experiment(s.tables, d, 0.05), PreconditionViolated);
}

TEST_CASE("extinction uses the N = 0 schedule when g(b) reaches Theta(1)") {
  Setup s(model::example_family(2.0, 4.0, 0.1, 0.2));
  const double b = 0.6;  // g(b) = 0.3 > Theta(1)
  CHECK(s.spec.g(b) >= s.tables.theta_one());
  const auto d = model::make_initial_data(
      s.spec, {{"preset", "zero-below"}, {"b", b}, {"height", 1.0}}, {{"preset", "compatible"}});
  solver::GridParams g;
  g.dt = 0.04;
  const auto e = extinction_experiment(s.tables, d, b, g);
  CHECK(e.predicted == doctest::Approx(3.0 * s.spec.tau_max() - std::log(0.3)).epsilon(1e-12));
  CHECK(e.exact_below_gb);
  CHECK(e.pass);
}
