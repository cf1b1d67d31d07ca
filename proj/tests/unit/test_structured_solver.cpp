#include "doctest.h"

#include <cmath>

#include "matsim/errors.hpp"
#include "matsim/monotone_cubic.hpp"
#include "matsim/numerics.hpp"
#include "matsim/structured_solver.hpp"

using namespace matsim;
using namespace matsim::solver;

namespace {

struct Setup {
  model::ModelSpec spec;
  chars::CharTables tables;
  explicit Setup(model::ModelFamilies f) : spec(model::build_model(std::move(f))), tables(spec) {}
};

model::InitialData data_for(const model::ModelSpec& spec, const model::Json& mu, const model::Json& gamma) {
  return model::make_initial_data(spec, mu, gamma);
}

double sup_abs(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

}  // namespace

TEST_CASE("grid nodes are uniform in ln h") {
  Setup s(model::example_family(2.0, 4.0, 0.1, 0.2));
  const MaturityGrid grid(s.tables, {0.05, 201});
  CHECK(grid.m()[0] == 0.0);
  CHECK(grid.m()[201] == 1.0);
  for (int j = 1; j < 201; ++j) {
    CHECK(grid.m()[j] > grid.m()[j - 1]);
    CHECK(std::log(grid.m()[j]) == doctest::Approx(-(201 - j) * 0.05).epsilon(1e-12));
  }
  const auto auto_grid = resolve_grid(s.spec, {});
  CHECK(auto_grid.dt <= 0.5 * s.spec.tau_min());
  CHECK(auto_grid.refined().M == 2 * auto_grid.M - 1);
  CHECK_THROWS_AS(resolve_grid(s.spec, {0.8 * s.spec.tau_min(), 10}), HistoryUnderflow);
}

TEST_CASE("history returns the initial profile at t <= 0 and stored values at nodes") {
  Setup s(model::example_family(2.0, 4.0, 0.1, 0.2));
  const MaturityGrid grid(s.tables, {0.05, 101});
  auto mu = [](double m) { return 1.0 + m * m; };
  SpaceTimeHistory hist(grid, mu, 8);
  std::vector<double> N(grid.m().size());
  for (std::size_t j = 0; j < N.size(); ++j) N[j] = mu(grid.m()[j]);
  hist.push(0.0, N);
  for (int j = 1; j <= 101; ++j) {
    CHECK(hist.lookup(0.0, grid.m()[j], grid.log_h(j)) == mu(grid.m()[j]));
    CHECK(hist.at_step(0, grid.log_h(j)) == N[j]);
  }
  for (int n = 1; n < 12; ++n) hist.push(n * 0.05, N);
  CHECK_THROWS_AS(hist.at_step(0, -1.0), HistoryUnderflow);
  CHECK(hist.lookup(0.5123, 0.3, std::log(0.3)) == doctest::Approx(mu(0.3)).epsilon(1e-6));
}

TEST_CASE("zero data stay identically zero") {
  Setup s(model::example_family(2.0, 4.0, 0.1, 0.2));
  const auto data = data_for(s.spec, {{"preset", "constant"}, {"value", 0.0}},
                             {{"preset", "constant"}, {"value", 0.0}});
  SimulateOptions o;
  o.grid.dt = 0.05;
  o.dump_times = {1.0, 4.0};
  const auto sol = simulate(s.tables, data, 4.0, o);
  REQUIRE(sol.dumps.size() == 2);
  for (const auto& snap : sol.dumps) {
    for (double v : snap.N) CHECK(v == 0.0);
    for (double v : snap.P) CHECK(v == 0.0);
  }
}

TEST_CASE("pure transport and decay without re-entry") {
  // beta = 0, Gamma = 0, V(m) = m: N(t,m) = exp(-(delta+1)t) mu(m exp(-t))
  Setup s(model::example_family(2.0, 4.0, 0.1, 0.2, 0.0));
  const auto data = data_for(s.spec, {{"preset", "bump"}, {"b", 0.0}, {"height", 1.0}},
                             {{"preset", "constant"}, {"value", 0.0}});
  SimulateOptions o;
  o.grid.dt = 0.02;
  o.dump_times = {0.5, 2.0};
  const auto sol = simulate(s.tables, data, 2.0, o);
  for (const auto& snap : sol.dumps) {
    for (std::size_t j = 0; j < sol.m.size(); ++j) {
      const double exact = std::exp(-1.1 * snap.t) * data.mu(sol.m[j] * std::exp(-snap.t));
      CHECK(snap.N[j] == doctest::Approx(exact).epsilon(1e-8).scale(1.0));
    }
  }
}

TEST_CASE("mass is transported without loss when beta, delta and Gamma vanish") {
  Setup s(model::example_family(2.0, 4.0, 0.0, 0.2, 0.0));
  const auto data = data_for(s.spec, {{"preset", "bump"}, {"b", 0.02}, {"height", 1.0}},
                             {{"preset", "constant"}, {"value", 0.0}});
  const double t = 1.0;
  SimulateOptions o;
  o.grid.dt = 0.01;
  o.dump_times = {t};
  const auto sol = simulate(s.tables, data, t, o);
  const MonotoneCubic field(sol.m, sol.dumps.at(0).N);
  const double a = 0.05;
  const double b = 0.3;
  const double moved = numerics::integrate([&](double m) { return field(m); }, a * std::exp(t),
                                           b * std::exp(t), 1e-10);
  const double initial = numerics::integrate(data.mu, a, b, 1e-12);
  CHECK(moved == doctest::Approx(initial).epsilon(1e-6));
}

TEST_CASE("division source term") {
  Setup s(model::example_family(2.0, 4.0, 0.1, 0.2));
  const auto data = data_for(s.spec, {{"preset", "constant"}, {"value", 1.0}},
                             {{"preset", "compatible"}});
  // above g(1) nothing divides into m
  CHECK(F_term(s.tables, data, 5.0, 0.75, 1.0) == 0.0);
  CHECK(F_term(s.tables, data, 0.1, 0.75, 1.0) == 0.0);
  CHECK(F_term(s.tables, data, 5.0, 0.3, 0.0) == 0.0);
  // Delta(0.25) = (sqrt(18) - 4)/2 and beta(Delta, 1) = 1/2
  const double D = 0.5 * (std::sqrt(18.0) - 4.0);
  CHECK(s.tables.delta(0.25) == doctest::Approx(D).epsilon(1e-12));
  CHECK(F_term(s.tables, data, 5.0, 0.25, 1.0) ==
        doctest::Approx(0.3655832995727863).epsilon(1e-10));
  // the two branches meet at t = tau(Delta(m)) for compatible data
  const double tD = s.spec.tau(D);
  const double x = data.mu(D);
  CHECK(F_term(s.tables, data, tD, 0.25, x) ==
        doctest::Approx(F_term(s.tables, data, tD * (1.0 + 1e-12), 0.25, x)).epsilon(1e-8));
  CHECK(G_term(s.tables, data, 5.0, 0.25, 0.0) == 0.0);
}

TEST_CASE("data vanishing below b give exact zeros below g(b)") {
  Setup s(model::example_family(2.0, 4.0, 0.1, 0.2));
  const auto data = data_for(s.spec, {{"preset", "zero-below"}, {"b", 0.05}, {"height", 1.0}},
                             {{"preset", "compatible"}});
  const double gb = s.spec.g(0.05);
  long checked = 0;
  SimulateOptions o;
  o.grid.dt = 0.04;
  o.observer = [&](const Snapshot& snap) {
    for (std::size_t j = 0; j < snap.N.size(); ++j) {
      if (j > 0 && std::exp(-(250.0 - static_cast<double>(j)) * 0.04) > gb) break;
      REQUIRE(snap.N[j] == 0.0);
      ++checked;
    }
  };
  o.grid.M = 251;
  simulate(s.tables, data, 8.0, o);
  CHECK(checked > 1000);
}

TEST_CASE("node 1 follows the boundary solution") {
  Setup s(model::example_family(2.0, 4.0, 0.1, 0.2));
  const auto data = data_for(s.spec, {{"preset", "constant"}, {"value", 0.7}},
                             {{"preset", "compatible"}});
  SimulateOptions o;
  o.grid.dt = 0.05;
  const auto sol = simulate(s.tables, data, 5.0, o);
  CHECK(sol.diag.boundary_gap_scale < 1e-4);
  CHECK(sol.diag.boundary_gap <= 100.0 * sol.diag.boundary_gap_scale);
  CHECK(sol.diag.max_branch_jump < 1e-6);
  CHECK(sol.diag.min_N > -1e-8);
}

TEST_CASE("refinement reduces the difference by at least a factor two") {
  Setup s(model::example_family(2.0, 4.0, 0.1, 0.2));
  const auto data = data_for(s.spec, {{"preset", "bump"}, {"b", 0.05}, {"height", 1.0}},
                             {{"preset", "compatible"}});
  const double T = 2.0;
  ResolvedGrid g{0.04, 251};
  std::vector<Snapshot> out;
  for (int k = 0; k < 3; ++k) {
    SimulateOptions o;
    o.grid.dt = g.dt;
    o.grid.M = g.M;
    o.dump_times = {T};
    out.push_back(simulate(s.tables, data, T, o).dumps.at(0));
    g = g.refined();
  }
  double diff[2] = {0.0, 0.0};
  for (int k = 0; k < 2; ++k) {
    for (std::size_t j = 1; j < out[k].N.size(); ++j) {
      diff[k] = std::max(diff[k], std::abs(out[k].N[j] - out[k + 1].N[2 * j - 1]));
    }
  }
  CHECK(diff[1] > 0.0);
  CHECK(diff[0] / diff[1] >= 2.0);
  CHECK(sup_abs(out[2].N) > 0.01);
}
