#ifndef MATSIM_INITIAL_DATA_HPP
#define MATSIM_INITIAL_DATA_HPP

#include <functional>
#include <string>

#include "matsim/characteristics.hpp"
#include "matsim/model.hpp"

namespace matsim::model {

/// Resting density mu(m) and proliferating age density Gamma(m, a) at t = 0.
///
/// Built from preset descriptions (JSON objects), which are kept so a run
/// can record exactly what it was started from.
///
///   {"preset": "constant",   "value": v}
///   {"preset": "bump",       "b": b, "height": h}    h sin^2(pi (m-b)/(1-b)) on [b,1]
///   {"preset": "zero-below", "b": b, "height": h}    h (1 - cos(pi (m-b)/(1-b)))/2 on [b,1]
///   {"preset": "tabulated",  "m": [...], "values": [...]}
///   {"preset": "tabulated",  "m": [...], "a": [...], "values": [[...], ...]}   (Gamma only)
///   {"preset": "compatible"}   Gamma(m,a) = beta(m, mu(m)) mu(m)   (Gamma only)
///   {"preset": "csv", "path": p}   columns m,mu; for Gamma m,a,Gamma on a full grid
///
/// Every preset also accepts "offset", added everywhere.
struct InitialData {
  std::function<double(double)> mu;
  std::function<double(double, double)> Gamma;
  Json mu_spec;
  Json gamma_spec;
  bool biological = true;
};

InitialData make_initial_data(const ModelSpec& spec, const Json& mu_spec, const Json& gamma_spec,
                              bool biological = true);

/// Gamma_bar(m) = int_0^{tau(Theta(m))} Gamma(m, a) da.
double gamma_bar(const chars::CharTables& tables, const InitialData& data, double m);

struct CompatibilityResult {
  bool compatible = false;
  double lhs = 0.0;  ///< Gamma(0,0)
  double rhs = 0.0;  ///< beta(0, mu(0)) mu(0)
};

CompatibilityResult check_compatibility(const ModelSpec& spec, const InitialData& data,
                                        double abs_tol = 1e-9);

}  // namespace matsim::model

#endif  // MATSIM_INITIAL_DATA_HPP
