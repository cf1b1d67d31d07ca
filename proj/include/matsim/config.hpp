#ifndef MATSIM_CONFIG_HPP
#define MATSIM_CONFIG_HPP

#include <optional>
#include <string>
#include <vector>

#include "matsim/model.hpp"
#include "matsim/structured_solver.hpp"

namespace matsim::config {

/// One parameter varied over a list of values; `parameter` is a dotted path
/// into the configuration document, e.g. "model.reentry.beta0".
struct Sweep {
  std::string parameter;
  std::vector<double> values;
};

/// A parsed run configuration. Example (YAML):
///
///   model:
///     velocity: {family: power_law, coefficient: 1, exponent: 1}
///     delay: {family: log_affine, alpha: 4}
///     division: {family: linear, kappa: 2}
///     reentry: {beta0: 1, theta: 1, n: 2}
///     mortality: {delta: 6, gamma: 6}
///   initial_data:
///     mu: {preset: bump, b: 0.05, height: 1}
///     gamma: {preset: compatible}
///   grid: {dt: auto, M: auto, depth: 10}
///   horizon: 20
///   dumps: [0, 5, 10, 20]
///   output: out/stable
///
/// Profiles (beta0, theta, delta, gamma, alpha_pi) are a number or
/// {m: [...], values: [...]}. Unknown keys are rejected.
struct RunConfig {
  model::ModelFamilies families;
  model::Json mu_spec;
  model::Json gamma_spec;
  bool biological = true;
  solver::GridParams grid;
  double horizon = 20.0;
  std::vector<double> dumps;
  std::string output = "out";
  std::optional<double> b;
  std::optional<Sweep> sweep;
  model::Json document;  ///< the document the config was parsed from
};

RunConfig parse_config(const model::Json& doc);
/// Reads a YAML file (JSON is valid YAML).
RunConfig load_config(const std::string& path);
model::Json load_document(const std::string& path);

/// Sets the number at a dotted path, creating nothing: the path must exist.
void set_path(model::Json& doc, const std::string& path, double value);

/// Every effective setting, defaults included.
model::Json effective(const RunConfig& cfg, const model::ModelSpec& spec,
                      const solver::ResolvedGrid& grid);

}  // namespace matsim::config

#endif  // MATSIM_CONFIG_HPP
