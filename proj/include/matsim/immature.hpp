#ifndef MATSIM_IMMATURE_HPP
#define MATSIM_IMMATURE_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "matsim/characteristics.hpp"
#include "matsim/initial_data.hpp"

namespace matsim::immature {

/// Hill re-entry rate at m = 0 and f(x) = x beta(0,x).
struct Hill {
  double beta0 = 1.0;
  double theta = 1.0;
  double n = 2.0;

  double beta(double x) const;
  double f(double x) const { return x * beta(x); }
  double df(double x) const;
  /// F(x) = int_0^x f(s) ds.
  double F(double x) const;
  /// Where x beta(0,x) starts decreasing; needs n > 1.
  double x_bar() const;
};

struct ImmatureParams {
  double rho = 0.0;
  double eta = 0.0;
  double r = 1.0;
  double xi_bar0 = 0.0;
  double pi_bar0 = 0.0;
  Hill hill;
  /// xi(t,0) = xi_scale e^{-eta t}, pi(t,0) = pi_scale e^{-eta t}.
  double xi_scale = 0.0;
  double pi_scale = 1.0;

  double xi0(double t) const;
  double pi0(double t) const;

  static ImmatureParams from_model(const chars::CharTables& tables);
};

struct IntegratorOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  /// Largest step as a fraction of r.
  double max_step_fraction = 1.0 / 64.0;
  /// When positive: fixed steps of r / fixed_steps_per_delay, no error control.
  int fixed_steps_per_delay = 0;
  /// Output samples per delay interval.
  int samples_per_delay = 64;
  double min_step = 1e-14;
};

/// One accepted mesh point of the method of steps.
struct Knot {
  double t;
  double x;
  double dx;
  double ddx;
  double y_ode;
};

/// Solution of the boundary system on [0, T].
///
/// Segment k holds the mesh on [k r, (k+1) r]; segment 0 is the initial
/// phase (phi, psi). Values between knots use quintic Hermite interpolation.
class Trajectory {
 public:
  double x(double t) const;
  double dx(double t) const;
  /// y from the explicit integral representations.
  double y(double t) const;
  /// Integral of w(t-s) g(x(s)) over [a, b] with 5-point Gauss per mesh interval.
  double integrate_along(double a, double b, const std::function<double(double, double)>& integrand) const;

  double r() const noexcept { return r_; }
  double horizon() const noexcept { return horizon_; }
  const std::vector<std::vector<Knot>>& segments() const noexcept { return segments_; }

  std::vector<double> times;  ///< uniform output grid
  std::vector<double> xs;
  std::vector<double> ys;
  bool derivative_jump_at_r = false;
  long steps = 0;
  long rejected = 0;

 private:
  friend Trajectory solve(const ImmatureParams&, double, const std::function<double(double)>&,
                          double, const IntegratorOptions&);
  const Knot* locate(double t, std::size_t& seg) const;

  ImmatureParams p_;
  double r_ = 1.0;
  double horizon_ = 0.0;
  double gamma_integral_ = 0.0;  // int_0^r Gamma0
  std::function<double(double)> gamma0_;
  std::vector<std::vector<Knot>> segments_;
};

/// Solves the initial phase on [0,r] and the delay equation on [r,T].
/// `gamma0(a)` is Gamma(0,a) on [0,r].
Trajectory solve(const ImmatureParams& p, double mu0, const std::function<double(double)>& gamma0,
                 double T, const IntegratorOptions& opts = {});

/// Initial phase only: the trajectory restricted to [0, r].
Trajectory solve_initial_phase(const ImmatureParams& p, double mu0,
                               const std::function<double(double)>& gamma0,
                               const IntegratorOptions& opts = {});

/// Convenience: parameters and data taken from a model and initial data.
Trajectory solve_for(const chars::CharTables& tables, const model::InitialData& data, double T,
                     const IntegratorOptions& opts = {});

double asymptotic_y(const ImmatureParams& p, double C);

/// J(phi) = F(phi(r)) + xi_bar0 int_0^r f(phi)^2.
double lyapunov_J(const ImmatureParams& p, const std::function<double(double)>& segment);
/// J evaluated on the history window [t - r, t] of a trajectory.
double lyapunov_J(const ImmatureParams& p, const Trajectory& traj, double t);
double lyapunov_rate(const ImmatureParams& p, double u);

enum class Verdict { GloballyStable, Unstable };

struct StabilityClass {
  Verdict verdict;
  double margin;
};

StabilityClass classify_stability(const ImmatureParams& p);

/// Rightmost real part among the roots of lambda + rho + beta0 = 2 xi_bar0 beta0 e^{-lambda r}.
double characteristic_root(const ImmatureParams& p);

struct UnboundedCheck {
  bool applies = false;
  std::vector<std::string> reasons;  ///< failed conditions
};

UnboundedCheck unbounded_scenario_check(const ImmatureParams& p, double mu0,
                                        const std::function<double(double)>& gamma0,
                                        int grid_points = 1025);

/// Limit of x when its relative variation over the last delay window is
/// below `rel_tv`; nothing otherwise.
std::optional<double> converged_limit(const Trajectory& traj, double rel_tv = 1e-8);

const char* to_string(Verdict v);

}  // namespace matsim::immature

#endif  // MATSIM_IMMATURE_HPP
