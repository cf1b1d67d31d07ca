#include "matsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "matsim/errors.hpp"

namespace matsim::analysis {

namespace {

std::vector<double> grid_with_zero() {
  std::vector<double> m{0.0};
  const auto& g = model::validation_grid();
  m.insert(m.end(), g.begin(), g.end());
  return m;
}

double sup_abs(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

}  // namespace

LocalCriterion local_criterion(const chars::CharTables& tables) {
  const auto& spec = tables.model();
  const double g_one = spec.division().at_one();
  LocalCriterion c;
  c.rhs = std::numeric_limits<double>::infinity();
  for (double m : grid_with_zero()) {
    const double dv = spec.dV(m);
    c.rhs = std::min({c.rhs, spec.delta(m) + dv, spec.gamma(m) + dv});
    if (m > g_one) continue;
    const double layer = spec.tau(tables.delta(m));
    constexpr int kSamples = 16;
    for (int k = 0; k <= kSamples; ++k) {
      c.sup_xi = std::max(c.sup_xi, tables.xi(layer * k / kSamples, m));
    }
  }
  c.lhs = (1.0 + 2.0 * c.sup_xi) * spec.reentry().beta0.max_value();
  c.holds = c.lhs < c.rhs;
  return c;
}

StabilityReport classify(const chars::CharTables& tables, std::optional<double> b) {
  StabilityReport r;
  r.local = local_criterion(tables);
  r.delta_strict = chars::check_delta_strict(tables);
  const auto p = immature::ImmatureParams::from_model(tables);
  r.immature = immature::classify_stability(p);
  r.characteristic_root = immature::characteristic_root(p);
  if (b && r.delta_strict.holds) r.schedule = tables.schedule(*b);

  if (r.local.holds && r.delta_strict.holds) {
    r.overall = Overall::GloballyExpStable;
  } else if (r.immature.margin <= 0.0) {
    r.overall = Overall::Unstable;
  } else if (!r.local.holds) {
    r.overall = Overall::ImmatureStableOnly;
  } else {
    r.overall = Overall::Indeterminate;
  }
  return r;
}

void attach_simulation(StabilityReport& report, const chars::CharTables& tables,
                       const model::InitialData& data, double T) {
  const auto traj = immature::solve_for(tables, data, T);
  const double r = traj.r();
  double first = 0.0;
  double tail = 0.0;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const double t = traj.times[i];
    if (t <= r) first = std::max(first, std::abs(traj.xs[i]));
    if (t >= T - r) tail = std::max(tail, std::abs(traj.xs[i]));
  }
  report.x_tail_sup = tail;
  report.x_decay_ratio = first > 0.0 ? tail / first : 0.0;
}

void require_equal_below(const chars::CharTables& tables, const model::InitialData& data1,
                         const model::InitialData& data2, double b) {
  const double a_max = tables.model().tau_max();
  std::vector<double> ms{0.0, b};
  for (double m : model::validation_grid()) {
    if (m <= b) ms.push_back(m);
  }
  for (double m : ms) {
    if (data1.mu(m) != data2.mu(m)) {
      throw PreconditionViolated("initial data differ at m = " + std::to_string(m) + " <= b");
    }
    for (int k = 0; k <= 8; ++k) {
      const double a = a_max * k / 8.0;
      if (data1.Gamma(m, a) != data2.Gamma(m, a)) {
        throw PreconditionViolated("Gamma differs at m = " + std::to_string(m) + " <= b");
      }
    }
  }
}

DependenceOutcome dependence_experiment(const chars::CharTables& tables,
                                        const model::InitialData& data1,
                                        const model::InitialData& data2, double b, double tolerance,
                                        double tolerance_P, const solver::GridParams& grid,
                                        std::vector<double> dump_times, std::optional<double> T) {
  const auto& spec = tables.model();
  if (!chars::check_delta_strict(tables).holds) {
    throw PreconditionViolated("dependence experiment needs Delta(m) < m");
  }
  require_equal_below(tables, data1, data2, b);
  const auto sch = tables.schedule(b);
  DependenceOutcome out;
  out.b = b;
  out.t_bar = sch.t_bar;
  out.t_full = sch.t_full;
  out.tolerance = tolerance;
  out.tolerance_P = tolerance_P;

  const double horizon = T.value_or(sch.t_full + 2.0 * spec.tau_max());
  const auto g = solver::resolve_grid(spec, grid);
  const auto b1 = immature::solve_for(tables, data1, horizon + 2.0 * g.dt);
  const auto b2 = immature::solve_for(tables, data2, horizon + 2.0 * g.dt);
  solver::FieldStepper s1(tables, data1, g, b1);
  solver::FieldStepper s2(tables, data2, g, b2);
  const auto& m = s1.grid().m();
  const double gb = spec.g(b);
  const double g1 = spec.division().at_one();

  std::vector<long> dump_steps;
  for (double d : dump_times) dump_steps.push_back(std::lround(d / g.dt));
  const long steps = std::lround(std::ceil(horizon / g.dt - 1e-9));
  const double slack = 1e-9 * g.dt;
  for (long n = 0; n <= steps; ++n) {
    if (n > 0) {
      s1.advance();
      s2.advance();
    }
    const auto& a = s1.current();
    const auto& c = s2.current();
    DependenceRow row;
    row.t = a.t;
    for (std::size_t j = 0; j < m.size(); ++j) {
      const double d = std::abs(a.N[j] - c.N[j]);
      if (m[j] <= gb) row.diff_below_gb = std::max(row.diff_below_gb, d);
      if (m[j] <= g1) row.diff_below_g1 = std::max(row.diff_below_g1, d);
      row.diff_all = std::max(row.diff_all, d);
      row.diff_P = std::max(row.diff_P, std::abs(a.P[j] - c.P[j]));
    }
    if (row.diff_below_gb != 0.0) out.exact_below_gb = false;
    if (row.t >= out.t_bar - slack && row.diff_below_g1 > tolerance) out.agree_below_g1 = false;
    if (row.t >= out.t_full - slack) {
      if (row.diff_all > tolerance) out.agree_all = false;
      if (row.diff_P > tolerance_P) out.agree_P = false;
    }
    if (std::find(dump_steps.begin(), dump_steps.end(), n) != dump_steps.end()) {
      out.rows.push_back(row);
    }
  }
  return out;
}

ExtinctionOutcome extinction_experiment(const chars::CharTables& tables,
                                        const model::InitialData& data, double b,
                                        const solver::GridParams& grid, double floor) {
  const auto& spec = tables.model();
  if (!chars::check_delta_strict(tables).holds) {
    throw PreconditionViolated("extinction experiment needs Delta(m) < m");
  }
  model::InitialData zero = data;
  zero.mu = [](double) { return 0.0; };
  zero.Gamma = [](double, double) { return 0.0; };
  require_equal_below(tables, data, zero, b);

  ExtinctionOutcome out;
  out.b = b;
  out.predicted = tables.schedule(b).t_full;
  const double horizon = out.predicted + spec.tau_max();
  const auto g = solver::resolve_grid(spec, grid);
  const auto boundary = immature::solve_for(tables, data, horizon + 2.0 * g.dt);
  solver::FieldStepper stepper(tables, data, g, boundary, false);
  const auto& m = stepper.grid().m();
  const double gb = spec.g(b);
  out.initial_sup = sup_abs(stepper.current().N);
  const long steps = std::lround(std::ceil(horizon / g.dt - 1e-9));
  for (long n = 0; n <= steps; ++n) {
    if (n > 0) stepper.advance();
    const auto& s = stepper.current();
    for (std::size_t j = 0; j < m.size() && m[j] <= gb; ++j) {
      if (s.N[j] != 0.0) out.exact_below_gb = false;
    }
    if (sup_abs(s.N) <= floor * out.initial_sup) {
      out.extinct_by = s.t;
      break;
    }
  }
  out.pass = out.extinct_by && *out.extinct_by <= out.predicted;
  return out;
}

const char* to_string(Overall o) {
  switch (o) {
    case Overall::GloballyExpStable: return "GloballyExpStable";
    case Overall::ImmatureStableOnly: return "ImmatureStableOnly";
    case Overall::Unstable: return "Unstable";
    case Overall::Indeterminate: return "Indeterminate";
  }
  return "?";
}

model::Json to_json(const StabilityReport& r) {
  model::Json j;
  j["local_criterion"] = {{"lhs", r.local.lhs},
                          {"rhs", r.local.rhs},
                          {"sup_xi", r.local.sup_xi},
                          {"holds", r.local.holds}};
  j["delta_strict"] = {{"holds", r.delta_strict.holds}};
  if (r.delta_strict.witness) j["delta_strict"]["witness"] = *r.delta_strict.witness;
  j["immature"] = {{"verdict", immature::to_string(r.immature.verdict)},
                   {"margin", r.immature.margin},
                   {"characteristic_root", r.characteristic_root}};
  if (r.schedule) {
    j["schedule"] = {{"b_seq", r.schedule->b_seq},
                     {"N", r.schedule->N},
                     {"t_bar", r.schedule->t_bar},
                     {"t_full", r.schedule->t_full}};
  }
  if (r.x_decay_ratio) {
    j["simulation"] = {{"x_decay_ratio", *r.x_decay_ratio}, {"x_tail_sup", *r.x_tail_sup}};
  }
  j["verdict"] = to_string(r.overall);
  return j;
}

model::Json to_json(const DependenceOutcome& d) {
  model::Json rows = model::Json::array();
  for (const auto& r : d.rows) {
    rows.push_back({{"t", r.t},
                    {"diff_below_gb", r.diff_below_gb},
                    {"diff_below_g1", r.diff_below_g1},
                    {"diff_all", r.diff_all},
                    {"diff_P", r.diff_P}});
  }
  return {{"runs", {d.run1, d.run2}},
          {"b", d.b},
          {"t_bar", d.t_bar},
          {"t_full", d.t_full},
          {"tolerance", d.tolerance},
          {"tolerance_P", d.tolerance_P},
          {"rows", rows},
          {"exact_below_gb", d.exact_below_gb},
          {"agree_below_g1", d.agree_below_g1},
          {"agree_all", d.agree_all},
          {"agree_P", d.agree_P},
          {"pass", d.pass()}};
}

model::Json to_json(const ExtinctionOutcome& e) {
  model::Json j{{"b", e.b},
                {"initial_sup", e.initial_sup},
                {"predicted", e.predicted},
                {"exact_below_gb", e.exact_below_gb},
                {"pass", e.pass}};
  j["extinct_by"] = e.extinct_by ? model::Json(*e.extinct_by) : model::Json(nullptr);
  return j;
}

}  // namespace matsim::analysis
