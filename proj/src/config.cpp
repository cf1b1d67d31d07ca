#include "matsim/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "matsim/errors.hpp"

namespace matsim::config {

using model::Json;

namespace {

Json from_yaml(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Sequence: {
      Json arr = Json::array();
      for (const auto& item : node) arr.push_back(from_yaml(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      Json obj = Json::object();
      for (const auto& kv : node) obj[kv.first.as<std::string>()] = from_yaml(kv.second);
      return obj;
    }
    case YAML::NodeType::Scalar: {
      const std::string s = node.Scalar();
      if (node.Tag() == "!") return s;  // quoted
      if (s == "true" || s == "false") return s == "true";
      try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
      } catch (const std::exception&) {
      }
      return s;
    }
  }
  return nullptr;
}

void only_keys(const Json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(where + ": expected a mapping");
  const std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& [key, _] : j.items()) {
    if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

double number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + ": expected a number");
  return j.get<double>();
}

double number_or(const Json& j, const char* key, double fallback, const std::string& where) {
  return j.contains(key) ? number(j.at(key), where + "." + key) : fallback;
}

std::vector<double> numbers(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected a list of numbers");
  std::vector<double> v;
  for (const auto& x : j) v.push_back(number(x, where));
  return v;
}

std::string text(const Json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where + ": expected a string");
  return j.get<std::string>();
}

model::Profile profile(const Json& j, const std::string& where) {
  if (j.is_number()) return model::Profile::constant(j.get<double>());
  only_keys(j, where, {"m", "values"});
  try {
    return model::Profile::tabulated(numbers(j.at("m"), where + ".m"),
                                     numbers(j.at("values"), where + ".values"));
  } catch (const Json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

model::Profile table(const Json& j, const std::string& where) {
  only_keys(j, where, {"family", "m", "values"});
  Json t{{"m", j.value("m", Json::array())}, {"values", j.value("values", Json::array())}};
  return profile(t, where);
}

model::ModelFamilies parse_model(const Json& j) {
  only_keys(j, "model", {"velocity", "delay", "division", "reentry", "mortality", "alpha_pi"});
  model::ModelFamilies f;
  if (j.contains("velocity")) {
    const Json& v = j.at("velocity");
    const std::string fam = text(v.value("family", Json("power_law")), "model.velocity.family");
    if (fam == "power_law") {
      only_keys(v, "model.velocity", {"family", "coefficient", "exponent"});
      f.velocity = model::PowerLawVelocity{number_or(v, "coefficient", 1.0, "model.velocity"),
                                           number_or(v, "exponent", 1.0, "model.velocity")};
    } else if (fam == "tabulated") {
      f.velocity = model::TabulatedVelocity{table(v, "model.velocity")};
    } else {
      throw ConfigError("model.velocity: unknown family '" + fam + "'");
    }
  }
  if (j.contains("delay")) {
    const Json& d = j.at("delay");
    const std::string fam = text(d.value("family", Json("log_affine")), "model.delay.family");
    if (fam == "log_affine") {
      only_keys(d, "model.delay", {"family", "alpha"});
      f.delay = model::LogAffineDelay{number_or(d, "alpha", 2.0, "model.delay")};
    } else if (fam == "constant") {
      only_keys(d, "model.delay", {"family", "value"});
      f.delay = model::ConstantDelay{number_or(d, "value", 1.0, "model.delay")};
    } else if (fam == "tabulated") {
      f.delay = model::TabulatedDelay{table(d, "model.delay")};
    } else {
      throw ConfigError("model.delay: unknown family '" + fam + "'");
    }
  }
  if (j.contains("division")) {
    const Json& g = j.at("division");
    const std::string fam = text(g.value("family", Json("linear")), "model.division.family");
    if (fam == "linear") {
      only_keys(g, "model.division", {"family", "kappa"});
      f.division = model::LinearDivision{number_or(g, "kappa", 2.0, "model.division")};
    } else if (fam == "tabulated") {
      f.division = model::TabulatedDivision{table(g, "model.division")};
    } else {
      throw ConfigError("model.division: unknown family '" + fam + "'");
    }
  }
  if (j.contains("reentry")) {
    const Json& b = j.at("reentry");
    only_keys(b, "model.reentry", {"beta0", "theta", "n"});
    if (b.contains("beta0")) f.reentry.beta0 = profile(b.at("beta0"), "model.reentry.beta0");
    if (b.contains("theta")) f.reentry.theta = profile(b.at("theta"), "model.reentry.theta");
    f.reentry.n = number_or(b, "n", 2.0, "model.reentry");
  }
  if (j.contains("mortality")) {
    const Json& m = j.at("mortality");
    only_keys(m, "model.mortality", {"delta", "gamma"});
    if (m.contains("delta")) f.mortality.delta = profile(m.at("delta"), "model.mortality.delta");
    if (m.contains("gamma")) f.mortality.gamma = profile(m.at("gamma"), "model.mortality.gamma");
  }
  if (j.contains("alpha_pi")) f.alpha_pi = profile(j.at("alpha_pi"), "model.alpha_pi");
  return f;
}

}  // namespace

RunConfig parse_config(const Json& doc) {
  only_keys(doc, "config",
            {"model", "initial_data", "grid", "horizon", "dumps", "output", "experiment", "sweep"});
  RunConfig cfg;
  cfg.document = doc;
  cfg.families = parse_model(doc.value("model", Json::object()));

  const Json init = doc.value("initial_data", Json::object());
  only_keys(init, "initial_data", {"mu", "gamma", "biological"});
  cfg.mu_spec = init.value("mu", Json{{"preset", "bump"}, {"b", 0.05}, {"height", 1.0}});
  cfg.gamma_spec = init.value("gamma", Json{{"preset", "compatible"}});
  if (init.contains("biological")) {
    if (!init.at("biological").is_boolean()) throw ConfigError("initial_data.biological: expected a boolean");
    cfg.biological = init.at("biological").get<bool>();
  }

  const Json grid = doc.value("grid", Json::object());
  only_keys(grid, "grid", {"dt", "M", "depth"});
  auto auto_or = [&](const char* key) -> double {
    if (!grid.contains(key)) return 0.0;
    const Json& v = grid.at(key);
    if (v.is_string() && v.get<std::string>() == "auto") return 0.0;
    return number(v, std::string("grid.") + key);
  };
  cfg.grid.dt = auto_or("dt");
  cfg.grid.M = static_cast<int>(auto_or("M"));
  cfg.grid.depth = number_or(grid, "depth", 10.0, "grid");

  cfg.horizon = number_or(doc, "horizon", 20.0, "config");
  if (!(cfg.horizon > 0.0)) throw ConfigError("horizon must be positive");
  if (doc.contains("dumps")) {
    cfg.dumps = numbers(doc.at("dumps"), "dumps");
  } else {
    cfg.dumps = {0.0, cfg.horizon};
  }
  if (doc.contains("output")) cfg.output = text(doc.at("output"), "output");

  if (doc.contains("experiment")) {
    const Json& e = doc.at("experiment");
    only_keys(e, "experiment", {"b"});
    if (e.contains("b")) cfg.b = number(e.at("b"), "experiment.b");
  }
  if (doc.contains("sweep")) {
    const Json& s = doc.at("sweep");
    only_keys(s, "sweep", {"parameter", "values"});
    cfg.sweep = Sweep{text(s.at("parameter"), "sweep.parameter"), numbers(s.at("values"), "sweep.values")};
    Json probe = doc;
    set_path(probe, cfg.sweep->parameter, 0.0);
  }
  return cfg;
}

Json load_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return from_yaml(YAML::Load(ss.str()));
  } catch (const YAML::Exception& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
}

RunConfig load_config(const std::string& path) { return parse_config(load_document(path)); }

void set_path(Json& doc, const std::string& path, double value) {
  Json* node = &doc;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (!node->is_object() || !node->contains(part)) {
      throw ConfigError("sweep parameter '" + path + "' not present in the config");
    }
    node = &(*node)[part];
  }
  if (!node->is_number()) throw ConfigError("sweep parameter '" + path + "' is not a number");
  *node = value;
}

Json effective(const RunConfig& cfg, const model::ModelSpec& spec, const solver::ResolvedGrid& grid) {
  Json j;
  j["model"] = spec.to_json();
  j["initial_data"] = {{"mu", cfg.mu_spec}, {"gamma", cfg.gamma_spec}, {"biological", cfg.biological}};
  j["grid"] = {{"dt", grid.dt}, {"M", grid.M}, {"depth", cfg.grid.depth},
               {"dt_requested", cfg.grid.dt > 0.0 ? Json(cfg.grid.dt) : Json("auto")},
               {"M_requested", cfg.grid.M > 0 ? Json(cfg.grid.M) : Json("auto")}};
  j["horizon"] = cfg.horizon;
  j["dumps"] = cfg.dumps;
  j["output"] = cfg.output;
  if (cfg.b) j["experiment"] = {{"b", *cfg.b}};
  return j;
}

}  // namespace matsim::config
