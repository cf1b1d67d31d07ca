#include "matsim/initial_data.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <memory>
#include <set>

#include "matsim/errors.hpp"
#include "matsim/io.hpp"
#include "matsim/monotone_cubic.hpp"
#include "matsim/numerics.hpp"

namespace matsim::model {

namespace {

double number(const Json& j, const char* key, double fallback) {
  return j.contains(key) ? j.at(key).get<double>() : fallback;
}

void expect_keys(const Json& j, std::initializer_list<const char*> allowed) {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items()) {
    if (!ok.count(key)) throw ConfigError("initial data: unknown key '" + key + "'");
  }
}

std::function<double(double)> maturity_profile(const Json& j) {
  const std::string preset = j.at("preset").get<std::string>();
  const double offset = number(j, "offset", 0.0);
  if (preset == "constant") {
    expect_keys(j, {"preset", "value", "offset"});
    const double v = number(j, "value", 0.0) + offset;
    return [v](double) { return v; };
  }
  if (preset == "bump" || preset == "zero-below") {
    expect_keys(j, {"preset", "b", "height", "offset"});
    const double b = j.at("b").get<double>();
    const double height = number(j, "height", 1.0);
    if (!(b >= 0.0 && b < 1.0)) throw ConfigError("initial data: b must lie in [0,1)");
    const bool bump = preset == "bump";
    return [b, height, offset, bump](double m) {
      if (m <= b) return offset;
      const double phase = std::numbers::pi * (m - b) / (1.0 - b);
      const double s = std::sin(phase);
      return offset + (bump ? height * s * s : 0.5 * height * (1.0 - std::cos(phase)));
    };
  }
  if (preset == "tabulated") {
    expect_keys(j, {"preset", "m", "values", "offset"});
    auto table = std::make_shared<MonotoneCubic>(j.at("m").get<std::vector<double>>(),
                                                 j.at("values").get<std::vector<double>>());
    return [table, offset](double m) { return (*table)(m) + offset; };
  }
  if (preset == "csv") {
    expect_keys(j, {"preset", "path", "offset"});
    const auto t = io::read_csv(j.at("path").get<std::string>());
    if (t.header.size() != 2) throw ConfigError("initial data: csv profile needs 2 columns");
    std::vector<double> m;
    std::vector<double> v;
    for (const auto& row : t.rows) {
      m.push_back(row[0]);
      v.push_back(row[1]);
    }
    auto table = std::make_shared<MonotoneCubic>(std::move(m), std::move(v));
    return [table, offset](double x) { return (*table)(x) + offset; };
  }
  throw ConfigError("initial data: unknown preset '" + preset + "'");
}

// Columns m,a,Gamma on a full rectangular grid, m-major.
Json gamma_table_from_csv(const Json& j) {
  expect_keys(j, {"preset", "path", "offset"});
  const auto t = io::read_csv(j.at("path").get<std::string>());
  if (t.header.size() != 3) throw ConfigError("initial data: csv Gamma needs columns m,a,Gamma");
  std::vector<double> m;
  std::vector<double> a;
  for (const auto& row : t.rows) {
    if (m.empty() || row[0] != m.back()) m.push_back(row[0]);
    if (m.size() == 1) a.push_back(row[1]);
  }
  if (t.rows.size() != m.size() * a.size()) throw ConfigError("initial data: Gamma csv is not rectangular");
  std::vector<std::vector<double>> v(m.size(), std::vector<double>(a.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i) v[i / a.size()][i % a.size()] = t.rows[i][2];
  Json out{{"preset", "tabulated"}, {"m", m}, {"a", a}, {"values", v}};
  if (j.contains("offset")) out["offset"] = j.at("offset");
  return out;
}

// Bilinear interpolation on a rectangular (m, a) table, clamped at the edges.
std::function<double(double, double)> age_table(const Json& j) {
  expect_keys(j, {"preset", "m", "a", "values", "offset"});
  const auto m = j.at("m").get<std::vector<double>>();
  const auto a = j.at("a").get<std::vector<double>>();
  const auto v = j.at("values").get<std::vector<std::vector<double>>>();
  const double offset = number(j, "offset", 0.0);
  if (m.size() < 2 || a.size() < 2 || v.size() != m.size()) {
    throw ConfigError("initial data: Gamma table needs >= 2 nodes in m and a");
  }
  for (const auto& row : v) {
    if (row.size() != a.size()) throw ConfigError("initial data: ragged Gamma table");
  }
  auto locate = [](const std::vector<double>& x, double q, std::size_t& i, double& w) {
    q = std::clamp(q, x.front(), x.back());
    const auto it = std::upper_bound(x.begin(), x.end(), q);
    i = std::min<std::size_t>(static_cast<std::size_t>(it - x.begin()), x.size() - 1) - 1;
    w = (q - x[i]) / (x[i + 1] - x[i]);
  };
  return [=](double mq, double aq) {
    std::size_t i = 0;
    std::size_t k = 0;
    double wm = 0.0;
    double wa = 0.0;
    locate(m, mq, i, wm);
    locate(a, aq, k, wa);
    const double lo = (1.0 - wa) * v[i][k] + wa * v[i][k + 1];
    const double hi = (1.0 - wa) * v[i + 1][k] + wa * v[i + 1][k + 1];
    return offset + (1.0 - wm) * lo + wm * hi;
  };
}

}  // namespace

InitialData make_initial_data(const ModelSpec& spec, const Json& mu_spec, const Json& gamma_spec,
                              bool biological) {
  InitialData d;
  d.mu_spec = mu_spec;
  d.gamma_spec = gamma_spec;
  d.biological = biological;
  try {
    d.mu = maturity_profile(mu_spec);
    const std::string gp = gamma_spec.at("preset").get<std::string>();
    if (gp == "compatible") {
      expect_keys(gamma_spec, {"preset", "offset"});
      const double offset = number(gamma_spec, "offset", 0.0);
      const HillReentry beta = spec.reentry();
      auto mu = d.mu;
      d.Gamma = [beta, mu, offset](double m, double) {
        const double u = mu(m);
        return beta(m, u) * u + offset;
      };
    } else if (gp == "tabulated" && gamma_spec.contains("a")) {
      d.Gamma = age_table(gamma_spec);
    } else if (gp == "csv") {
      d.Gamma = age_table(gamma_table_from_csv(gamma_spec));
    } else {
      auto f = maturity_profile(gamma_spec);
      d.Gamma = [f](double m, double) { return f(m); };
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("initial data: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("initial data: ") + e.what());
  }
  if (biological) {
    const double a_max = spec.tau_max();
    for (double m : validation_grid()) {
      if (d.mu(m) < 0.0) throw HypothesisViolation("mu >= 0", m, "biological data");
      for (double a : {0.0, 0.25 * a_max, 0.5 * a_max, 0.75 * a_max, a_max}) {
        if (d.Gamma(m, a) < 0.0) throw HypothesisViolation("Gamma >= 0", m, "biological data");
      }
    }
    if (d.mu(0.0) < 0.0) throw HypothesisViolation("mu >= 0", 0.0, "biological data");
  }
  return d;
}

double gamma_bar(const chars::CharTables& tables, const InitialData& data, double m) {
  const double upper = tables.model().tau(tables.theta(m));
  auto f = [&data, m](double a) { return data.Gamma(m, a); };
  return numerics::integrate(f, 0.0, upper, tables.tolerances().quad_tol, 1e-14, "Gamma_bar");
}

CompatibilityResult check_compatibility(const ModelSpec& spec, const InitialData& data,
                                        double abs_tol) {
  CompatibilityResult out;
  out.lhs = data.Gamma(0.0, 0.0);
  const double mu0 = data.mu(0.0);
  out.rhs = spec.beta(0.0, mu0) * mu0;
  out.compatible = std::abs(out.lhs - out.rhs) <= abs_tol;
  return out;
}

}  // namespace matsim::model
