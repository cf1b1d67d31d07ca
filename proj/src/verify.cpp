#include "matsim/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "matsim/analysis.hpp"
#include "matsim/errors.hpp"
#include "matsim/structured_solver.hpp"

namespace matsim::verify {

namespace {

// Frozen from tests/oracles/reference_values.py (closed forms, 30 digits).
constexpr double kTFull = 13.345506928718539;
constexpr double kTBar = 11.042921835724493;
constexpr double kSqrt5 = 2.2360679774997897;
constexpr double kYLimitEta0 = 0.51664140471478615;

std::string fmt(const char* f, double a) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
  char buf[200];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

struct Model {
  model::ModelSpec spec;
  chars::CharTables tables;
  explicit Model(model::ModelFamilies f) : spec(model::build_model(std::move(f))), tables(spec) {}
};

model::ModelFamilies reference_family(double beta0 = 1.0, double theta = 1.0, double n = 2.0) {
  return model::example_family(2.0, 4.0, 0.1, 0.2, beta0, theta, n);
}

model::ModelFamilies quadratic_velocity(double kappa, double alpha, double delta, double gamma) {
  auto f = model::example_family(kappa, alpha, delta, gamma);
  f.velocity = model::PowerLawVelocity{1.0, 2.0};
  return f;
}

template <class Body>
Experiment timed(int id, std::string title, Body body) {
  Experiment e;
  e.id = id;
  e.title = std::move(title);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(e);
  } catch (const std::exception& ex) {
    e.checks.push_back({"no error", false, ex.what()});
  }
  e.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return e;
}

struct Segment {
  double mu0;
  std::function<double(double)> gamma0;
  const char* label;
};

double sup_on(const immature::Trajectory& tr, double lo, double hi) {
  double s = 0.0;
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    if (tr.times[i] >= lo && tr.times[i] <= hi) s = std::max(s, std::abs(tr.xs[i]));
  }
  return s;
}

double max_diff(const solver::Snapshot& coarse, const solver::Snapshot& fine, bool P = false) {
  double d = 0.0;
  const auto& a = P ? coarse.P : coarse.N;
  const auto& b = P ? fine.P : fine.N;
  for (std::size_t j = 1; j < a.size(); ++j) d = std::max(d, std::abs(a[j] - b[2 * j - 1]));
  return d;
}

}  // namespace

bool Experiment::pass() const {
  if (checks.empty()) return false;
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

std::string Experiment::summary() const {
  std::ostringstream s;
  int failed = 0;
  for (const auto& c : checks) failed += c.pass ? 0 : 1;
  s << checks.size() - failed << "/" << checks.size() << " checks";
  for (const auto& c : checks) {
    if (!c.pass) {
      s << "; first failure: " << c.name << " (" << c.detail << ")";
      break;
    }
  }
  s << "; " << fmt("%.2f s", seconds);
  return s.str();
}

Experiment closed_forms() {
  return timed(1, "closed forms of h, chi, Theta, Delta (kappa=2, alpha=4, V(m)=m)", [](Experiment& e) {
    const double kappa = 2.0;
    const double alpha = 4.0;
    Model md(model::example_family(kappa, alpha, 0.1, 0.2));
    double err_h = 0.0;
    double err_chi = 0.0;
    double err_theta = 0.0;
    double err_delta = 0.0;
    for (int i = 1; i <= 1000; ++i) {
      const double m = i / 1000.0;
      err_h = std::max(err_h, std::abs(md.tables.h(m) - m));
      for (double s : {-0.25, -1.0, -3.0}) {
        err_chi = std::max(err_chi, std::abs(md.tables.chi(s, m) - m * std::exp(s)));
      }
      err_theta = std::max(err_theta, std::abs(md.tables.theta(m) -
                                               0.5 * (std::sqrt(alpha * alpha + 4.0 * m) - alpha)));
      // constant Theta(1) above g(1) = 1/kappa
      const double km = std::min(kappa * m, 1.0);
      err_delta = std::max(err_delta, std::abs(md.tables.delta(m) -
                                               0.5 * (std::sqrt(4.0 * km + alpha * alpha) - alpha)));
    }
    e.checks.push_back({"h(m) = m", err_h <= 1e-8, fmt("max error %.3g", err_h)});
    e.checks.push_back({"chi(s,m) = m e^s", err_chi <= 1e-8, fmt("max error %.3g", err_chi)});
    e.checks.push_back({"Theta closed form", err_theta <= 1e-8, fmt("max error %.3g", err_theta)});
    e.checks.push_back({"Delta closed form", err_delta <= 1e-8, fmt("max error %.3g", err_delta)});
    const auto sch = md.tables.schedule(0.05);
    e.checks.push_back({"schedule t_full", std::abs(sch.t_full - kTFull) <= 1e-9,
                        fmt("t_full %.15g, oracle %.15g", sch.t_full, kTFull)});
    e.checks.push_back({"schedule t_bar", std::abs(sch.t_bar - kTBar) <= 1e-9,
                        fmt("t_bar %.15g, oracle %.15g", sch.t_bar, kTBar)});
  });
}

Experiment global_stability() {
  return timed(2, "global stability for margin > 0.1: decay and Lyapunov descent", [](Experiment& e) {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const immature::IntegratorOptions opts;
    const std::vector<Segment> segments = {
        {2.0, [](double) { return 0.5; }, "constant"},
        {0.1, [](double) { return 0.0; }, "no proliferating cells"},
        {5.0, [](double a) { return 1.0 + a; }, "ramp"},
        {1.0, nullptr, "compatible"},
        {10.0, [](double a) { return 3.0 * std::sin(a) * std::sin(a); }, "oscillating"},
    };
    int accepted = 0;
    int decayed = 0;
    int descended = 0;
    int runs = 0;
    double worst_ratio = 0.0;
    double worst_rise = 0.0;
    for (int draw = 0; draw < 1000 && accepted < 20; ++draw) {
      const double beta0 = 0.05 + 4.95 * unit(rng);
      const double theta = 0.1 + 2.9 * unit(rng);
      const double n = 1.0 + 3.0 * unit(rng);
      Model md(reference_family(beta0, theta, n));
      const auto p = immature::ImmatureParams::from_model(md.tables);
      if (immature::classify_stability(p).margin <= 0.1) continue;
      ++accepted;
      const double T = 50.0 * p.r;
      for (const auto& seg : segments) {
        auto gamma0 = seg.gamma0;
        if (!gamma0) {
          const double c = p.hill.f(seg.mu0);
          gamma0 = [c](double) { return c; };
        }
        const auto tr = immature::solve(p, seg.mu0, gamma0, T, opts);
        ++runs;
        const double initial = sup_on(tr, 0.0, p.r);
        const double tail = sup_on(tr, T - p.r, T);
        const double ratio = initial > 0.0 ? tail / initial : 0.0;
        worst_ratio = std::max(worst_ratio, ratio);
        if (ratio < 1e-4) ++decayed;
        bool descent = true;
        double prev = immature::lyapunov_J(p, tr, p.r);
        for (double t = p.r + p.r / 16.0; t <= T; t += p.r / 16.0) {
          const double J = immature::lyapunov_J(p, tr, t);
          const double tol = 10.0 * (opts.abs_tol + opts.rel_tol * std::abs(prev));
          worst_rise = std::max(worst_rise, (J - prev) / tol);
          if (J > prev + tol) descent = false;
          prev = J;
        }
        if (descent) ++descended;
      }
    }
    e.checks.push_back({"at least 20 parameterizations with margin > 0.1", accepted >= 20,
                        std::to_string(accepted) + " accepted"});
    e.checks.push_back({"x below 1e-4 of the initial sup within 50 r", decayed == runs,
                        std::to_string(decayed) + "/" + std::to_string(runs) +
                            fmt(" runs, worst tail ratio %.3g", worst_ratio)});
    e.checks.push_back({"Lyapunov functional nonincreasing", descended == runs,
                        std::to_string(descended) + "/" + std::to_string(runs) +
                            fmt(" runs, largest rise %.3g tolerances", std::max(worst_rise, 0.0))});
  });
}

Experiment instability() {
  return timed(3, "instability for margin <= -0.1: no decay and a positive root", [](Experiment& e) {
    struct Case {
      double beta0, theta, n;
    };
    const std::vector<Case> cases = {{1.5, 1.0, 2.0}, {2.0, 1.0, 2.0}, {3.0, 0.5, 3.0},
                                     {4.0, 2.0, 1.5}, {6.0, 1.0, 4.0}, {2.5, 0.2, 1.0}};
    int agree = 0;
    int count = 0;
    for (const auto& c : cases) {
      Model md(model::example_family(4.0, 4.5, 0.0, 0.0, c.beta0, c.theta, c.n));
      const auto p = immature::ImmatureParams::from_model(md.tables);
      const double margin = immature::classify_stability(p).margin;
      if (margin > -0.1) {
        e.checks.push_back({"case margin <= -0.1", false, fmt("margin %.4g", margin)});
        continue;
      }
      ++count;
      const double T = 200.0 * p.r;
      const auto tr = immature::solve(p, 1e-3, [](double) { return 1e-3; }, T);
      const double limsup = sup_on(tr, T - 10.0 * p.r, T);
      const double root = immature::characteristic_root(p);
      const bool persists = limsup > 1e-3;
      const bool positive = root > 0.0;
      if (persists == positive) ++agree;
      e.checks.push_back({fmt("beta0=%g theta=%g n=%g", c.beta0, c.theta, c.n), persists && positive,
                          fmt("margin %.4g, limsup %.4g, root %.4g", margin, limsup, root)});
    }
    e.checks.push_back({"at least 5 cases", count >= 5, std::to_string(count) + " cases"});
    e.checks.push_back({"indicators agree on every case", agree == count,
                        std::to_string(agree) + "/" + std::to_string(count)});
  });
}

Experiment boundedness() {
  return timed(4, "boundedness for rho > 0: sup over T and 2T within 1%", [](Experiment& e) {
    const std::vector<model::ModelFamilies> models = {
        reference_family(),
        model::example_family(4.0, 4.5, 0.0, 0.0, 2.0),
        model::example_family(3.0, 3.5, 0.05, 0.0, 5.0, 1.0, 4.0),
    };
    const std::vector<Segment> segments = {
        {2.0, [](double) { return 0.5; }, "constant"},
        {0.01, [](double) { return 0.001; }, "small"},
        {8.0, [](double a) { return 1.0 + a; }, "ramp"},
        {0.5, nullptr, "compatible"},
    };
    int count = 0;
    double worst = 0.0;
    int ok = 0;
    for (const auto& f : models) {
      Model md(f);
      const auto p = immature::ImmatureParams::from_model(md.tables);
      if (!(p.rho > 0.0)) continue;
      const double T = 50.0 * p.r;
      for (const auto& seg : segments) {
        auto gamma0 = seg.gamma0;
        if (!gamma0) {
          const double c = p.hill.f(seg.mu0);
          gamma0 = [c](double) { return c; };
        }
        const auto tr = immature::solve(p, seg.mu0, gamma0, 2.0 * T);
        const double s1 = sup_on(tr, 0.0, T);
        const double s2 = sup_on(tr, 0.0, 2.0 * T);
        const double rel = (s2 - s1) / s2;
        worst = std::max(worst, rel);
        ++count;
        if (rel < 0.01) ++ok;
      }
    }
    e.checks.push_back({"at least 10 combinations", count >= 10, std::to_string(count)});
    e.checks.push_back({"suprema over T and 2T within 1%", ok == count,
                        std::to_string(ok) + "/" + std::to_string(count) +
                            fmt(", worst relative gap %.3g", worst)});
  });
}

Experiment unbounded_growth() {
  return timed(5, "unbounded growth for rho = 0 (V(m)=m^2, delta=0)", [](Experiment& e) {
    Model md(quadratic_velocity(4.0, 4.0, 0.0, 0.0));
    const auto p = immature::ImmatureParams::from_model(md.tables);
    const double mu0 = 2.0;
    const double g0 = p.hill.f(mu0);  // compatible: Gamma0 = beta(0, mu0) mu0 = 0.4
    auto gamma0 = [g0](double) { return g0; };
    e.checks.push_back({"rho = 0", p.rho == 0.0, fmt("rho %g", p.rho)});
    e.checks.push_back({"x_bar = 1", std::abs(p.hill.x_bar() - 1.0) < 1e-14, fmt("x_bar %.17g", p.hill.x_bar())});
    const auto chk = immature::unbounded_scenario_check(p, mu0, gamma0);
    std::string reasons;
    for (const auto& r : chk.reasons) reasons += r + "; ";
    e.checks.push_back({"scenario conditions hold", chk.applies, reasons.empty() ? "all hold" : reasons});
    const double T = 100.0 * p.r;
    const auto tr = immature::solve(p, mu0, gamma0, T);
    bool increasing = true;
    double at = 0.0;
    for (std::size_t i = 1; i < tr.xs.size(); ++i) {
      if (!(tr.xs[i] > tr.xs[i - 1])) {
        increasing = false;
        at = tr.times[i];
        break;
      }
    }
    e.checks.push_back({"x strictly increasing", increasing,
                        increasing ? std::to_string(tr.xs.size()) + " samples" : fmt("fails at t=%g", at)});
    e.checks.push_back({"x(T) > 10 x(0)", tr.xs.back() > 10.0 * tr.xs.front(),
                        fmt("x(0) %.4g, x(T) %.6g", tr.xs.front(), tr.xs.back())});
  });
}

Experiment zero_propagation() {
  return timed(6, "exact zeros below g(b) for data vanishing on [0,b]", [](Experiment& e) {
    struct Case {
      const char* label;
      model::ModelFamilies f;
      double b;
      double dt;
    };
    std::vector<Case> cases;
    cases.push_back({"reference, b=0.05", reference_family(), 0.05, 0.04});
    cases.push_back({"kappa=3 alpha=5, b=0.1", model::example_family(3.0, 5.0, 0.0, 0.3, 2.0), 0.1, 0.05});
    auto fast = model::example_family(3.0, 3.0, 0.2, 0.1, 1.5, 0.5, 3.0);
    fast.velocity = model::PowerLawVelocity{2.0, 1.0};
    cases.push_back({"V(m)=2m kappa=3 alpha=3, b=0.2", std::move(fast), 0.2, 0.04});
    for (auto& c : cases) {
      Model md(std::move(c.f));
      const auto data = model::make_initial_data(
          md.spec, {{"preset", "zero-below"}, {"b", c.b}, {"height", 1.0}}, {{"preset", "compatible"}});
      const double gb = md.spec.g(c.b);
      const double T = md.tables.schedule(c.b).t_full + 2.0 * md.spec.tau_max();
      long checked = 0;
      long nonzero = 0;
      double sup_above = 0.0;
      solver::SimulateOptions o;
      o.grid.dt = c.dt;
      o.compute_P = false;
      std::vector<double> m;
      o.observer = [&](const solver::Snapshot& s) {
        for (std::size_t j = 0; j < s.N.size(); ++j) {
          if (m[j] <= gb) {
            ++checked;
            if (s.N[j] != 0.0) ++nonzero;
          } else {
            sup_above = std::max(sup_above, std::abs(s.N[j]));
          }
        }
      };
      m = solver::MaturityGrid(md.tables, solver::resolve_grid(md.spec, o.grid)).m();
      solver::simulate(md.tables, data, T, o);
      e.checks.push_back({c.label, nonzero == 0 && checked > 0 && sup_above > 0.0,
                          std::to_string(checked) + " values, " + std::to_string(nonzero) +
                              fmt(" nonzero, T=%.4g, sup above g(b) %.3g", T, sup_above)});
    }
  });
}

Experiment dependence() {
  return timed(7, "twin runs agree on [0,1] after t_full (kappa=2, alpha=4, b=0.05)", [](Experiment& e) {
    Model md(reference_family());
    const double b = 0.05;
    const auto d1 = model::make_initial_data(
        md.spec, {{"preset", "bump"}, {"b", b}, {"height", 1.0}, {"offset", 0.3}}, {{"preset", "compatible"}});
    const auto d2 = model::make_initial_data(
        md.spec, {{"preset", "bump"}, {"b", b}, {"height", 2.5}, {"offset", 0.3}}, {{"preset", "compatible"}});
    const solver::ResolvedGrid g{0.04, 251};
    const double t_full = md.tables.schedule(b).t_full;
    e.checks.push_back({"t_full matches oracle", std::abs(t_full - kTFull) <= 1e-9,
                        fmt("%.15g vs %.15g", t_full, kTFull)});

    // self-convergence error at t_full at this resolution
    const double t_dump = std::ceil(t_full / g.dt) * g.dt;
    std::vector<solver::Snapshot> snaps;
    for (const auto& res : {g, g.refined()}) {
      solver::SimulateOptions o;
      o.grid.dt = res.dt;
      o.grid.M = res.M;
      o.dump_times = {t_dump};
      snaps.push_back(solver::simulate(md.tables, d1, t_dump, o).dumps.at(0));
    }
    const double err_N = max_diff(snaps[0], snaps[1]);
    const double err_P = max_diff(snaps[0], snaps[1], true);
    e.checks.push_back({"self-convergence error measured", err_N > 0.0 && err_P > 0.0,
                        fmt("N %.3g, P %.3g at t=%.4g", err_N, err_P, t_dump)});

    solver::GridParams gp;
    gp.dt = g.dt;
    gp.M = g.M;
    const auto out = analysis::dependence_experiment(md.tables, d1, d2, b, 10.0 * err_N, 10.0 * err_P, gp,
                                                     {1.0, t_dump});
    double before = 0.0;
    double after = 0.0;
    double after_P = 0.0;
    for (const auto& r : out.rows) {
      if (r.t < t_full) before = std::max(before, r.diff_all);
      if (r.t >= t_full) {
        after = std::max(after, r.diff_all);
        after_P = std::max(after_P, r.diff_P);
      }
    }
    e.checks.push_back({"N agrees on [0,1] for t >= t_full", out.agree_all,
                        fmt("max diff at dump %.3g, tolerance %.3g", after, out.tolerance)});
    e.checks.push_back({"P agrees on [0,1] for t >= t_full", out.agree_P,
                        fmt("max diff at dump %.3g, tolerance %.3g", after_P, out.tolerance_P)});
    e.checks.push_back({"N agrees on [0,g(1)] for t >= t_bar", out.agree_below_g1, "every step checked"});
    e.checks.push_back({"exact agreement on [0,g(b)]", out.exact_below_gb, "every step checked"});
    e.checks.push_back({"runs differ before the threshold", before > 1e-2,
                        fmt("max diff at t=1 %.3g", before)});
  });
}

Experiment extinction() {
  return timed(8, "extinction by (N+3) tau_max - ln h(g(b))", [](Experiment& e) {
    Model md(reference_family());
    const auto data = model::make_initial_data(
        md.spec, {{"preset", "bump"}, {"b", 0.05}, {"height", 1.0}}, {{"preset", "compatible"}});
    solver::GridParams gp;
    gp.dt = 0.04;
    gp.M = 251;
    const auto out = analysis::extinction_experiment(md.tables, data, 0.05, gp);
    e.checks.push_back({"predicted time matches oracle", std::abs(out.predicted - kTFull) <= 1e-9,
                        fmt("%.15g vs %.15g", out.predicted, kTFull)});
    e.checks.push_back({"below 1e-8 of the initial sup in time", out.pass,
                        out.extinct_by ? fmt("extinct by t=%.4g, predicted %.6g", *out.extinct_by, out.predicted)
                                       : std::string("not extinct within the run")});
    e.checks.push_back({"exact zeros below g(b)", out.exact_below_gb, "every step checked"});
  });
}

Experiment y_limit() {
  return timed(9, "limit of y in converging runs, including eta = 0", [](Experiment& e) {
    {
      Model md(quadratic_velocity(2.0, 4.0, 0.5, 0.0));
      const auto p = immature::ImmatureParams::from_model(md.tables);
      e.checks.push_back({"eta = 0 case", p.eta == 0.0, fmt("eta %g", p.eta)});
      const auto tr = immature::solve(p, 1.0, [](double) { return 0.5; }, 400.0 * p.r);
      const auto C = immature::converged_limit(tr);
      e.checks.push_back({"x converges", C.has_value(), C ? fmt("C = %.15g", *C) : std::string("no limit")});
      if (C) {
        const double y_inf = immature::asymptotic_y(p, *C);
        const double direct = p.r * p.hill.beta(*C) * *C;
        e.checks.push_back({"C = sqrt(5)", std::abs(*C - kSqrt5) <= 1e-6, fmt("%.15g vs %.15g", *C, kSqrt5)});
        e.checks.push_back({"|y(T) - r beta(0,C) C| <= 1e-6", std::abs(tr.ys.back() - direct) <= 1e-6,
                            fmt("y(T) %.15g, r beta C %.15g", tr.ys.back(), direct)});
        e.checks.push_back({"asymptotic_y matches oracle", std::abs(y_inf - kYLimitEta0) <= 1e-9,
                            fmt("%.15g vs %.15g", y_inf, kYLimitEta0)});
      }
    }
    {
      Model md(model::example_family(4.0, 4.5, 0.0, 0.0, 2.0));
      const auto p = immature::ImmatureParams::from_model(md.tables);
      const auto tr = immature::solve(p, 1.0, [](double) { return 0.5; }, 400.0 * p.r);
      const auto C = immature::converged_limit(tr);
      e.checks.push_back({"eta > 0 case converges", C.has_value(), C ? fmt("C = %.15g", *C) : std::string("no limit")});
      if (C) {
        const double y_inf = immature::asymptotic_y(p, *C);
        e.checks.push_back({"|y(T) - asymptotic_y(C)| <= 1e-6", std::abs(tr.ys.back() - y_inf) <= 1e-6,
                            fmt("y(T) %.15g, asymptotic %.15g", tr.ys.back(), y_inf)});
      }
    }
  });
}

Experiment self_convergence() {
  return timed(10, "self-convergence of N(T,.) under (M, 1/dt) doubling", [](Experiment& e) {
    Model md(reference_family());
    const auto data = model::make_initial_data(
        md.spec, {{"preset", "bump"}, {"b", 0.05}, {"height", 1.0}, {"offset", 0.3}},
        {{"preset", "compatible"}});
    const double T = 4.0;
    solver::ResolvedGrid g{0.04, 251};
    std::vector<solver::Snapshot> out;
    for (int k = 0; k < 3; ++k) {
      solver::SimulateOptions o;
      o.grid.dt = g.dt;
      o.grid.M = g.M;
      o.dump_times = {T};
      out.push_back(solver::simulate(md.tables, data, T, o).dumps.at(0));
      g = g.refined();
    }
    const double d1 = max_diff(out[0], out[1]);
    const double d2 = max_diff(out[1], out[2]);
    e.checks.push_back({"difference shrinks by >= 2", d2 > 0.0 && d1 / d2 >= 2.0,
                        fmt("d1 %.3g, d2 %.3g, ratio %.3g", d1, d2, d1 / d2)});
    double sup = 0.0;
    for (double v : out[2].N) sup = std::max(sup, std::abs(v));
    e.checks.push_back({"solution is not trivial", sup > 1e-2, fmt("sup N(T,.) %.4g", sup)});
  });
}

std::vector<std::function<Experiment()>> all_experiments() {
  return {closed_forms, global_stability, instability, boundedness, unbounded_growth,
          zero_propagation, dependence, extinction, y_limit, self_convergence};
}

std::vector<std::string> suite_names() {
  return {"closed-forms", "stability", "instability", "unbounded", "dependence",
          "extinction", "convergence", "all"};
}

std::vector<std::function<Experiment()>> suite(const std::string& name) {
  if (name == "closed-forms") return {closed_forms};
  if (name == "stability") return {global_stability, boundedness, y_limit};
  if (name == "instability") return {instability};
  if (name == "unbounded") return {unbounded_growth};
  if (name == "dependence") return {zero_propagation, dependence};
  if (name == "extinction") return {extinction};
  if (name == "convergence") return {self_convergence};
  if (name == "all") return all_experiments();
  throw ConfigError("unknown suite '" + name + "'");
}

}  // namespace matsim::verify
