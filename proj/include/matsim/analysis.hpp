#ifndef MATSIM_ANALYSIS_HPP
#define MATSIM_ANALYSIS_HPP

#include <optional>
#include <string>
#include <vector>

#include "matsim/characteristics.hpp"
#include "matsim/immature.hpp"
#include "matsim/initial_data.hpp"
#include "matsim/structured_solver.hpp"

namespace matsim::analysis {

struct LocalCriterion {
  double lhs = 0.0;  ///< (1 + 2 sup xi) sup beta(m, 0)
  double rhs = 0.0;  ///< min(inf(delta + V'), inf(gamma + V'))
  double sup_xi = 0.0;
  bool holds = false;
};

/// Local exponential stability test; sup xi is taken over the initial layer
/// t <= tau(Delta(m)), m <= g(1).
LocalCriterion local_criterion(const chars::CharTables& tables);

enum class Overall { GloballyExpStable, ImmatureStableOnly, Unstable, Indeterminate };

struct StabilityReport {
  LocalCriterion local;
  chars::DeltaStrictResult delta_strict;
  immature::StabilityClass immature{immature::Verdict::GloballyStable, 0.0};
  double characteristic_root = 0.0;
  std::optional<chars::PropagationSchedule> schedule;
  Overall overall = Overall::Indeterminate;
  /// Filled by attach_simulation: sup x over the last delay window relative to
  /// the initial sup.
  std::optional<double> x_decay_ratio;
  std::optional<double> x_tail_sup;
};

StabilityReport classify(const chars::CharTables& tables, std::optional<double> b = std::nullopt);

/// Runs the boundary system from `data` over [0, T] and records decay metrics.
void attach_simulation(StabilityReport& report, const chars::CharTables& tables,
                       const model::InitialData& data, double T);

struct DependenceRow {
  double t = 0.0;
  double diff_below_gb = 0.0;  ///< max |N1 - N2| on [0, g(b)]
  double diff_below_g1 = 0.0;  ///< on [0, g(1)]
  double diff_all = 0.0;       ///< on [0, 1]
  double diff_P = 0.0;         ///< max |P1 - P2| on [0, 1]
};

struct DependenceOutcome {
  std::string run1 = "data1";
  std::string run2 = "data2";
  double b = 0.0;
  double t_bar = 0.0;
  double t_full = 0.0;
  double tolerance = 0.0;    ///< for N
  double tolerance_P = 0.0;  ///< for P
  std::vector<DependenceRow> rows;  ///< at the requested dump times
  bool exact_below_gb = true;       ///< zero difference on [0, g(b)] at every step
  bool agree_below_g1 = true;       ///< within tolerance for t >= t_bar
  bool agree_all = true;            ///< within tolerance for t >= t_full
  bool agree_P = true;              ///< within tolerance for t >= t_full
  bool pass() const { return exact_below_gb && agree_below_g1 && agree_all && agree_P; }
};

/// Twin simulation of two data sets agreeing on [0, b]. Runs until T
/// (default t_full + 2 tau_max) and checks every step.
DependenceOutcome dependence_experiment(const chars::CharTables& tables,
                                        const model::InitialData& data1,
                                        const model::InitialData& data2, double b, double tolerance,
                                        double tolerance_P, const solver::GridParams& grid = {},
                                        std::vector<double> dump_times = {},
                                        std::optional<double> T = std::nullopt);

struct ExtinctionOutcome {
  double b = 0.0;
  double initial_sup = 0.0;
  std::optional<double> extinct_by;
  double predicted = 0.0;
  bool exact_below_gb = true;
  bool pass = false;
};

/// Data vanishing on [0, b]: first time sup |N| falls to 1e-8 of its initial
/// value, against the predicted (N+3) tau_max - ln h(g(b)).
ExtinctionOutcome extinction_experiment(const chars::CharTables& tables,
                                        const model::InitialData& data, double b,
                                        const solver::GridParams& grid = {},
                                        double floor = 1e-8);

/// Throws PreconditionViolated unless data1 and data2 coincide on
/// [0, b] x [0, tau_max].
void require_equal_below(const chars::CharTables& tables, const model::InitialData& data1,
                         const model::InitialData& data2, double b);

const char* to_string(Overall o);
model::Json to_json(const StabilityReport& r);
model::Json to_json(const DependenceOutcome& d);
model::Json to_json(const ExtinctionOutcome& e);

}  // namespace matsim::analysis

#endif  // MATSIM_ANALYSIS_HPP
