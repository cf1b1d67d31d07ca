#ifndef MATSIM_MODEL_HPP
#define MATSIM_MODEL_HPP

#include <optional>
#include <variant>
#include <vector>

#include "json.hpp"

#include "matsim/monotone_cubic.hpp"

namespace matsim::model {

using Json = nlohmann::json;

/// A continuous function of maturity on [0,1]: a constant or a table with
/// monotone cubic interpolation.
class Profile {
 public:
  Profile() = default;
  static Profile constant(double value);
  static Profile tabulated(std::vector<double> m, std::vector<double> values);

  double operator()(double m) const { return table_ ? (*table_)(m) : value_; }
  double derivative(double m) const { return table_ ? table_->derivative(m) : 0.0; }

  bool is_constant() const noexcept { return !table_.has_value(); }
  double constant_value() const noexcept { return value_; }
  const MonotoneCubic* table() const noexcept { return table_ ? &*table_ : nullptr; }

  /// Extremes over the table knots plus the validation grid.
  double min_value() const;
  double max_value() const;

  Json to_json() const;
  static Profile from_json(const Json& j);

 private:
  double value_ = 0.0;
  std::optional<MonotoneCubic> table_;
};

// ---------------------------------------------------------------------------
// Model function families
// ---------------------------------------------------------------------------

/// V(m) = coefficient * m^exponent on [0,1].
struct PowerLawVelocity {
  double coefficient = 1.0;
  double exponent = 1.0;
};

/// Samples of V on [0,1], first knot at m = 0 with V(0) = 0.
struct TabulatedVelocity {
  Profile samples;
};

class VelocityFamily {
 public:
  VelocityFamily() = default;
  VelocityFamily(PowerLawVelocity v) : family_(v) {}
  VelocityFamily(TabulatedVelocity v) : family_(std::move(v)) {}

  double operator()(double m) const;
  double derivative(double m) const;
  const PowerLawVelocity* power_law() const { return std::get_if<PowerLawVelocity>(&family_); }
  const TabulatedVelocity* tabulated() const { return std::get_if<TabulatedVelocity>(&family_); }

 private:
  std::variant<PowerLawVelocity, TabulatedVelocity> family_{PowerLawVelocity{}};
};

/// tau(m) = ln(m + alpha).
struct LogAffineDelay {
  double alpha = 2.0;
};
struct ConstantDelay {
  double value = 1.0;
};
struct TabulatedDelay {
  Profile samples;
};

class DelayFamily {
 public:
  DelayFamily() = default;
  DelayFamily(LogAffineDelay d) : family_(d) {}
  DelayFamily(ConstantDelay d) : family_(d) {}
  DelayFamily(TabulatedDelay d) : family_(std::move(d)) {}

  double operator()(double m) const;
  double derivative(double m) const;
  const LogAffineDelay* log_affine() const { return std::get_if<LogAffineDelay>(&family_); }
  const ConstantDelay* constant() const { return std::get_if<ConstantDelay>(&family_); }
  const TabulatedDelay* tabulated() const { return std::get_if<TabulatedDelay>(&family_); }

 private:
  std::variant<LogAffineDelay, ConstantDelay, TabulatedDelay> family_{LogAffineDelay{}};
};

/// g(m) = m / kappa.
struct LinearDivision {
  double kappa = 2.0;
};
/// Samples of g on [0,1], strictly increasing, g(0) = 0.
struct TabulatedDivision {
  Profile samples;
};

/// Daughter maturity g and the extended inverse used by the dynamics:
/// g^{-1}(m) = 1 and (g^{-1})'(m) = 0 for m > g(1).
class DivisionFamily {
 public:
  DivisionFamily() = default;
  DivisionFamily(LinearDivision d) : family_(d) {}
  DivisionFamily(TabulatedDivision d) : family_(std::move(d)) {}

  double operator()(double m) const;
  double inverse(double m) const;
  double inverse_derivative(double m) const;
  double at_one() const { return (*this)(1.0); }
  const LinearDivision* linear() const { return std::get_if<LinearDivision>(&family_); }
  const TabulatedDivision* tabulated() const { return std::get_if<TabulatedDivision>(&family_); }

 private:
  std::variant<LinearDivision, TabulatedDivision> family_{LinearDivision{}};
};

/// beta(m, x) = beta0(m) theta(m)^n / (theta(m)^n + x^n).
struct HillReentry {
  Profile beta0 = Profile::constant(1.0);
  Profile theta = Profile::constant(1.0);
  double n = 2.0;

  double operator()(double m, double x) const;
  double at(double beta0_value, double theta_value, double x) const;
};

struct MortalityProfiles {
  Profile delta = Profile::constant(0.0);  ///< resting death rate
  Profile gamma = Profile::constant(0.0);  ///< proliferating apoptosis rate
};

/// Everything build_model needs; each family individually well-formed.
struct ModelFamilies {
  VelocityFamily velocity;
  DelayFamily delay;
  DivisionFamily division;
  HillReentry reentry;
  MortalityProfiles mortality;
  Profile alpha_pi = Profile::constant(1.0);
};

/// A validated model instance. Immutable after construction.
class ModelSpec {
 public:
  const VelocityFamily& velocity() const noexcept { return f_.velocity; }
  const DelayFamily& delay() const noexcept { return f_.delay; }
  const DivisionFamily& division() const noexcept { return f_.division; }
  const HillReentry& reentry() const noexcept { return f_.reentry; }
  const MortalityProfiles& mortality() const noexcept { return f_.mortality; }
  const Profile& alpha_pi() const noexcept { return f_.alpha_pi; }
  const ModelFamilies& families() const noexcept { return f_; }

  double V(double m) const { return f_.velocity(m); }
  double dV(double m) const { return f_.velocity.derivative(m); }
  double tau(double m) const { return f_.delay(m); }
  double g(double m) const { return f_.division(m); }
  double g_inv(double m) const { return f_.division.inverse(m); }
  double beta(double m, double x) const { return f_.reentry(m, x); }
  double delta(double m) const { return f_.mortality.delta(m); }
  double gamma(double m) const { return f_.mortality.gamma(m); }

  double tau_max() const noexcept { return tau_max_; }
  double tau_min() const noexcept { return tau_min_; }
  double rho() const noexcept { return rho_; }
  double eta() const noexcept { return eta_; }
  double r() const noexcept { return r_; }

  Json to_json() const;
  static ModelSpec from_json(const Json& j);

  friend ModelSpec build_model(ModelFamilies families);

 private:
  explicit ModelSpec(ModelFamilies f) : f_(std::move(f)) {}

  ModelFamilies f_;
  double tau_max_ = 0.0;
  double tau_min_ = 0.0;
  double rho_ = 0.0;
  double eta_ = 0.0;
  double r_ = 0.0;
};

/// Validates every standing hypothesis and computes the derived constants.
/// Throws HypothesisViolation naming the first failed condition.
ModelSpec build_model(ModelFamilies families);

/// 2048 maturities on (1e-6, 1]: geometric below 0.01, uniform above.
const std::vector<double>& validation_grid();

/// The worked example family: V(m) = m, g(m) = m/kappa, tau(m) = ln(m+alpha),
/// constant mortality and Hill re-entry with constant parameters.
ModelFamilies example_family(double kappa, double alpha, double delta, double gamma,
                             double beta0 = 1.0, double theta = 1.0, double n = 2.0);

}  // namespace matsim::model

#endif  // MATSIM_MODEL_HPP
