#ifndef MATSIM_CHARACTERISTICS_HPP
#define MATSIM_CHARACTERISTICS_HPP

#include <optional>
#include <vector>

#include "matsim/model.hpp"

namespace matsim::chars {

struct Tolerances {
  double quad_tol = 1e-10;  ///< relative, kernel integrals
  double root_tol = 1e-10;  ///< maturity
  double m_floor = 1e-12;   ///< below this a tabulated V is extended linearly
};

struct PropagationSchedule {
  std::vector<double> b_seq;  ///< b_0 .. b_{N+2}
  int N = 0;
  double t_bar = 0.0;
  double t_full = 0.0;
};

/// Characteristic curves, commitment maps and survival kernels of one model.
///
/// All maps are evaluated in log space, L(m) = ln h(m), where backward
/// characteristics are translations: L(chi(s,m)) = L(m) + s.
class CharTables {
 public:
  explicit CharTables(const model::ModelSpec& spec, Tolerances tol = {});

  const model::ModelSpec& model() const noexcept { return *spec_; }
  const Tolerances& tolerances() const noexcept { return tol_; }

  double h(double m) const;
  double h_inv(double u) const;
  /// ln h(m); -inf at m = 0.
  double log_h(double m) const;
  double log_h_inv(double L) const;

  double chi(double s, double m) const;

  double theta(double m) const;
  /// The m with theta(m) = x; explicit, defined for x <= theta(1).
  double theta_inv(double x) const;
  double theta_one() const noexcept { return theta_one_; }
  double delta(double m) const;
  /// Throws DomainError for y >= theta(1).
  double delta_inv(double y) const;

  double kernel_K(double t, double m) const;
  double kernel_H(double t, double m) const;
  double xi(double t, double m) const;
  double pi(double t, double m) const;
  double xi_bar(double m) const;
  double pi_bar(double m) const;

  PropagationSchedule schedule(double b) const;

 private:
  double survival(const model::Profile& rate, double t, double m) const;
  double velocity_ratio(double t, double m) const;

  const model::ModelSpec* spec_;
  Tolerances tol_;
  double theta_one_ = 0.0;

  // tabulated velocity only: L on a log-spaced maturity table
  std::vector<double> log_m_;
  std::vector<double> log_h_tab_;
  double floor_slope_ = 1.0;  // m / V(m) at the first table point
};

struct DeltaStrictResult {
  bool holds = true;
  std::optional<double> witness;
};

/// Whether Delta(m) < m on (0,1]. Uses the analytic test when the model is
/// one of the built-in linear/power-law families and the validation grid
/// otherwise.
DeltaStrictResult check_delta_strict(const CharTables& tables);

}  // namespace matsim::chars

#endif  // MATSIM_CHARACTERISTICS_HPP
