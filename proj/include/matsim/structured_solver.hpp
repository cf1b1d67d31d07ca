#ifndef MATSIM_STRUCTURED_SOLVER_HPP
#define MATSIM_STRUCTURED_SOLVER_HPP

#include <deque>
#include <functional>
#include <vector>

#include "matsim/characteristics.hpp"
#include "matsim/immature.hpp"
#include "matsim/initial_data.hpp"

namespace matsim::solver {

/// Grid parameters. Nodes are uniform in ln h with spacing dt, so that one
/// time step moves every node exactly onto its lower neighbour:
/// ln h(m_j) = -(M - j) dt, j = 1..M, plus the node m_0 = 0.
struct GridParams {
  double dt = 0.0;     ///< 0: min(tau_min/20, 0.5/L)
  int M = 0;           ///< 0: derived from depth
  double depth = 10.0; ///< span of ln h covered by nodes 1..M
};

struct ResolvedGrid {
  double dt;
  int M;

  /// (dt/2, 2M-1): coarse node j is fine node 2j-1.
  ResolvedGrid refined() const { return {0.5 * dt, 2 * M - 1}; }
};

ResolvedGrid resolve_grid(const model::ModelSpec& spec, const GridParams& params);

class MaturityGrid {
 public:
  MaturityGrid(const chars::CharTables& tables, ResolvedGrid g);

  int M() const noexcept { return M_; }
  double dt() const noexcept { return dt_; }
  /// Maturities m_0 = 0, m_1, ..., m_M = 1.
  const std::vector<double>& m() const noexcept { return m_; }
  double log_h(int j) const noexcept { return -(M_ - j) * dt_; }

 private:
  int M_;
  double dt_;
  std::vector<double> m_;
};

struct Snapshot {
  double t = 0.0;
  std::vector<double> N;  ///< index 0 is m = 0
  std::vector<double> P;
};

/// Ring buffer of N snapshots on the uniform time grid, with interpolation
/// cubic in time and monotone cubic in ln h.
class SpaceTimeHistory {
 public:
  SpaceTimeHistory(const MaturityGrid& grid, std::function<double(double)> mu, std::size_t depth);

  void push(double t, const std::vector<double>& N);
  /// N(t, m) given ln h(m) = L; exactly mu(m) for t <= 0.
  double lookup(double t, double m, double L) const;
  /// N at the exact stored time index n, at ln h = L.
  double at_step(long n, double L) const;

  long latest() const noexcept { return n_last_; }
  std::size_t depth() const noexcept { return depth_; }

 private:
  struct Entry {
    long n;
    std::vector<double> N;
    std::vector<double> slope;  // in ln h, nodes 1..M
  };
  const Entry& entry(long n) const;
  double spatial(const Entry& e, double L) const;

  const MaturityGrid* grid_;
  std::function<double(double)> mu_;
  std::size_t depth_;
  std::deque<Entry> buf_;
  long n_last_ = -1;
};

struct Diagnostics {
  long steps = 0;
  int max_fixed_point_iterations = 0;
  double min_N = 0.0;
  double min_P = 0.0;
  double max_branch_jump = 0.0;     ///< relative F jump across the initial layer boundary
  double boundary_gap = 0.0;        ///< max |N(t, m_1) - x(t)|
  double boundary_gap_scale = 0.0;  ///< h(m_1)
};

struct FieldSolution {
  std::vector<double> m;
  double dt = 0.0;
  std::vector<Snapshot> dumps;
  immature::Trajectory boundary;
  Diagnostics diag;
};

struct SimulateOptions {
  GridParams grid;
  std::vector<double> dump_times;
  std::function<void(const Snapshot&)> observer;
  immature::IntegratorOptions immature;
  bool compute_P = true;
};

/// Advances N and P one step at a time on a fixed grid.
class FieldStepper {
 public:
  FieldStepper(const chars::CharTables& tables, const model::InitialData& data, ResolvedGrid g,
               const immature::Trajectory& boundary, bool compute_P = true);
  FieldStepper(const FieldStepper&) = delete;
  FieldStepper& operator=(const FieldStepper&) = delete;

  const Snapshot& current() const noexcept { return cur_; }
  long step_index() const noexcept { return n_; }
  const MaturityGrid& grid() const noexcept { return grid_; }
  const SpaceTimeHistory& history() const noexcept { return hist_; }
  const Diagnostics& diagnostics() const noexcept { return diag_; }

  /// One step of length dt: N and P at t + dt from the integrated
  /// formulation restarted at t.
  const Snapshot& advance();

 private:
  struct GaussPoint {
    double sigma, m, L;
    double K, H;          // K(dt - sigma, m_j), H(dt - sigma, m_j)
    double b0, th;        // Hill at m
    double D, LD, tauD, xibar, b0D, thD, LG;
    double Th, LTh, tauTh, pibar, b0Th, thTh;
  };
  struct NodeCache {
    double K, H;  // K(dt, m_j), H(dt, m_j)
    GaussPoint q[2];
    // F source points: q itself, or Gauss points on the part of the step
    // below g(1) when the characteristic crosses it
    GaussPoint f[2];
    double f_weight;
    double f_end;  // F vanishes on (f_end, dt]
    // delays at both ends of the F and G sub-intervals, to detect where the
    // initial layer ends inside a step
    double tauD0, tauD1, tauTh0, tauTh1;
  };

  double sigma_of_layer_end(int j, double t, double hi, bool division) const;
  double F_source(int j, double t);
  double G_source(int j, double t);
  GaussPoint make_point(int j, double sigma);

  double F_at(const GaussPoint& g, double s);
  double G_at(const GaussPoint& g, double s) const;
  double char_value(int j, int k) const;
  double char_value_P(int j) const;

  const chars::CharTables* tables_;
  const model::InitialData* data_;
  const immature::Trajectory* boundary_;
  bool compute_P_;
  MaturityGrid grid_;
  SpaceTimeHistory hist_;
  std::vector<NodeCache> cache_;
  Snapshot cur_;
  std::deque<Snapshot> recent_;  // steps n, n-1, n-2
  long n_ = 0;
  Diagnostics diag_;
};

/// F(t, m, x): division source of the resting phase.
double F_term(const chars::CharTables& tables, const model::InitialData& data, double t, double m,
              double x);
/// G(t, m, x): exit source of the proliferating phase.
double G_term(const chars::CharTables& tables, const model::InitialData& data, double t, double m,
              double x);

/// Time steps the integrated formulation from 0 to T.
FieldSolution simulate(const chars::CharTables& tables, const model::InitialData& data, double T,
                       const SimulateOptions& opts = {});

}  // namespace matsim::solver

#endif  // MATSIM_STRUCTURED_SOLVER_HPP
