#include "matsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "matsim/errors.hpp"

namespace matsim::model {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const char* which, double location, const std::string& detail = {}) {
  if (!ok) throw HypothesisViolation(which, location, detail);
}

// Grid plus both endpoints, used wherever "for all m in [0,1]" is checked.
std::vector<double> closed_grid() {
  std::vector<double> m{0.0};
  const auto& g = validation_grid();
  m.insert(m.end(), g.begin(), g.end());
  return m;
}

}  // namespace

const std::vector<double>& validation_grid() {
  static const std::vector<double> grid = [] {
    std::vector<double> m;
    m.reserve(2048);
    const double lo = 1e-6;
    const double mid = 0.01;
    for (int i = 0; i < 1024; ++i) {
      m.push_back(lo * std::pow(mid / lo, i / 1024.0));
    }
    for (int i = 0; i < 1024; ++i) {
      m.push_back(mid + (1.0 - mid) * (i + 1) / 1024.0);
    }
    return m;
  }();
  return grid;
}

// ---------------------------------------------------------------------------
// Profile

Profile Profile::constant(double value) {
  Profile p;
  p.value_ = value;
  return p;
}

Profile Profile::tabulated(std::vector<double> m, std::vector<double> values) {
  Profile p;
  p.value_ = values.empty() ? 0.0 : values.front();
  p.table_.emplace(std::move(m), std::move(values));
  return p;
}

double Profile::min_value() const {
  if (!table_) return value_;
  double v = *std::min_element(table_->ys().begin(), table_->ys().end());
  for (double m : closed_grid()) v = std::min(v, (*table_)(m));
  return v;
}

double Profile::max_value() const {
  if (!table_) return value_;
  double v = *std::max_element(table_->ys().begin(), table_->ys().end());
  for (double m : closed_grid()) v = std::max(v, (*table_)(m));
  return v;
}

Json Profile::to_json() const {
  if (!table_) return Json{{"constant", value_}};
  return Json{{"m", table_->xs()}, {"values", table_->ys()}};
}

Profile Profile::from_json(const Json& j) {
  if (j.is_number()) return constant(j.get<double>());
  if (j.contains("constant")) return constant(j.at("constant").get<double>());
  return tabulated(j.at("m").get<std::vector<double>>(), j.at("values").get<std::vector<double>>());
}

// ---------------------------------------------------------------------------
// Families

double VelocityFamily::operator()(double m) const {
  return std::visit(overloaded{
                        [m](const PowerLawVelocity& v) {
                          return v.exponent == 1.0 ? v.coefficient * m
                                                   : v.coefficient * std::pow(m, v.exponent);
                        },
                        [m](const TabulatedVelocity& v) { return v.samples(m); },
                    },
                    family_);
}

double VelocityFamily::derivative(double m) const {
  return std::visit(overloaded{
                        [m](const PowerLawVelocity& v) {
                          if (v.exponent == 1.0) return v.coefficient;
                          if (m == 0.0) return 0.0;
                          return v.coefficient * v.exponent * std::pow(m, v.exponent - 1.0);
                        },
                        [m](const TabulatedVelocity& v) { return v.samples.derivative(m); },
                    },
                    family_);
}

double DelayFamily::operator()(double m) const {
  return std::visit(overloaded{
                        [m](const LogAffineDelay& d) { return std::log(m + d.alpha); },
                        [](const ConstantDelay& d) { return d.value; },
                        [m](const TabulatedDelay& d) { return d.samples(m); },
                    },
                    family_);
}

double DelayFamily::derivative(double m) const {
  return std::visit(overloaded{
                        [m](const LogAffineDelay& d) { return 1.0 / (m + d.alpha); },
                        [](const ConstantDelay&) { return 0.0; },
                        [m](const TabulatedDelay& d) { return d.samples.derivative(m); },
                    },
                    family_);
}

double DivisionFamily::operator()(double m) const {
  return std::visit(overloaded{
                        [m](const LinearDivision& d) { return m / d.kappa; },
                        [m](const TabulatedDivision& d) { return d.samples(m); },
                    },
                    family_);
}

double DivisionFamily::inverse(double m) const {
  if (m <= 0.0) return 0.0;
  if (m >= at_one()) return 1.0;
  if (const auto* lin = linear()) return std::min(1.0, m * lin->kappa);
  const Profile& g = tabulated()->samples;
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < m ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double DivisionFamily::inverse_derivative(double m) const {
  if (m > at_one()) return 0.0;
  if (const auto* lin = linear()) return lin->kappa;
  const double d = tabulated()->samples.derivative(inverse(m));
  return d > 0.0 ? 1.0 / d : std::numeric_limits<double>::infinity();
}

double HillReentry::at(double b0, double th, double x) const {
  const double xp = x > 0.0 ? x : 0.0;
  if (n == 1.0) return b0 * th / (th + xp);
  if (n == 2.0) return b0 * th * th / (th * th + xp * xp);
  const double tn = std::pow(th, n);
  return b0 * tn / (tn + std::pow(xp, n));
}

double HillReentry::operator()(double m, double x) const {
  return at(beta0(m), theta(m), x);
}

// ---------------------------------------------------------------------------
// Validation

namespace {

void validate_velocity(const VelocityFamily& v) {
  if (const auto* p = v.power_law()) {
    require(p->coefficient > 0.0, "V: coefficient > 0", kNaN);
    require(p->exponent >= 1.0, "V: exponent >= 1 (1/V not integrable at 0)", kNaN);
    return;
  }
  const MonotoneCubic* t = v.tabulated()->samples.table();
  require(t != nullptr, "V: tabulated samples required", kNaN);
  require(t->xs().front() == 0.0 && t->ys().front() == 0.0, "V(0) = 0", 0.0,
          "first sample must be (0, 0)");
  require(t->xs().back() >= 1.0, "V: samples must cover [0,1]", t->xs().back());
  for (double m : validation_grid()) {
    require(v(m) > 0.0, "V(m) > 0 on (0,1]", m);
    require(std::isfinite(v.derivative(m)), "V continuously differentiable", m);
  }
  // V(m) <= V'(0) m + O(m^2) on the first cubic piece keeps 1/V non-integrable.
}

void validate_delay(const DelayFamily& d, const VelocityFamily& v) {
  if (const auto* la = d.log_affine()) {
    require(la->alpha > 1.0, "tau: log_affine alpha > 1", la->alpha);
  } else if (const auto* c = d.constant()) {
    require(c->value > 0.0, "tau > 0", kNaN);
  } else {
    require(d.tabulated()->samples.table() != nullptr, "tau: tabulated samples required", kNaN);
  }
  for (double m : closed_grid()) {
    require(d(m) > 0.0, "tau > 0", m);
    if (m > 0.0) {
      require(d.derivative(m) + 1.0 / v(m) > 0.0, "tau'(m) + 1/V(m) > 0", m);
    }
  }
}

void validate_division(const DivisionFamily& g) {
  if (const auto* lin = g.linear()) {
    require(lin->kappa > 1.0, "g: kappa > 1 (g(m) <= m)", lin->kappa);
    return;
  }
  const MonotoneCubic* t = g.tabulated()->samples.table();
  require(t != nullptr, "g: tabulated samples required", kNaN);
  require(t->xs().front() == 0.0 && t->ys().front() == 0.0, "g(0) = 0", 0.0);
  for (std::size_t i = 1; i < t->ys().size(); ++i) {
    require(t->ys()[i] > t->ys()[i - 1], "g strictly increasing", t->xs()[i]);
  }
  for (double m : validation_grid()) {
    require(g(m) <= m, "g(m) <= m", m);
  }
}

void validate_reentry(const HillReentry& b) {
  require(b.n >= 1.0, "beta: Hill exponent n >= 1", b.n);
  require(b.beta0.min_value() >= 0.0, "beta0 >= 0", kNaN);
  require(b.theta.min_value() > 0.0, "theta > 0", kNaN);
}

}  // namespace

ModelSpec build_model(ModelFamilies families) {
  validate_velocity(families.velocity);
  validate_delay(families.delay, families.velocity);
  validate_division(families.division);
  validate_reentry(families.reentry);
  require(families.mortality.delta.min_value() >= 0.0, "delta >= 0", kNaN);
  require(families.mortality.gamma.min_value() >= 0.0, "gamma >= 0", kNaN);
  require(families.alpha_pi(0.0) == 1.0, "alpha_pi(0) = 1", 0.0);
  require(families.alpha_pi.min_value() > 0.0, "alpha_pi > 0", kNaN);

  ModelSpec spec(std::move(families));
  const DelayFamily& d = spec.delay();
  if (const auto* la = d.log_affine()) {
    spec.tau_max_ = std::log(1.0 + la->alpha);
    spec.tau_min_ = std::log(la->alpha);
  } else if (const auto* c = d.constant()) {
    spec.tau_max_ = spec.tau_min_ = c->value;
  } else {
    spec.tau_max_ = d.tabulated()->samples.max_value();
    spec.tau_min_ = d.tabulated()->samples.min_value();
  }
  spec.r_ = spec.tau(0.0);
  spec.rho_ = spec.delta(0.0) + spec.dV(0.0);
  spec.eta_ = spec.gamma(0.0) + spec.dV(0.0);
  require(std::isfinite(spec.rho_) && std::isfinite(spec.eta_), "V'(0) finite", 0.0);
  return spec;
}

ModelFamilies example_family(double kappa, double alpha, double delta, double gamma,
                             double beta0, double theta, double n) {
  ModelFamilies f;
  f.velocity = PowerLawVelocity{1.0, 1.0};
  f.delay = LogAffineDelay{alpha};
  f.division = LinearDivision{kappa};
  f.reentry = HillReentry{Profile::constant(beta0), Profile::constant(theta), n};
  f.mortality = MortalityProfiles{Profile::constant(delta), Profile::constant(gamma)};
  return f;
}

// ---------------------------------------------------------------------------
// Serialization

Json ModelSpec::to_json() const {
  Json j;
  if (const auto* p = f_.velocity.power_law()) {
    j["velocity"] = {{"family", "power_law"}, {"coefficient", p->coefficient}, {"exponent", p->exponent}};
  } else {
    j["velocity"] = {{"family", "tabulated"}, {"samples", f_.velocity.tabulated()->samples.to_json()}};
  }
  if (const auto* la = f_.delay.log_affine()) {
    j["delay"] = {{"family", "log_affine"}, {"alpha", la->alpha}};
  } else if (const auto* c = f_.delay.constant()) {
    j["delay"] = {{"family", "constant"}, {"value", c->value}};
  } else {
    j["delay"] = {{"family", "tabulated"}, {"samples", f_.delay.tabulated()->samples.to_json()}};
  }
  if (const auto* lin = f_.division.linear()) {
    j["division"] = {{"family", "linear"}, {"kappa", lin->kappa}};
  } else {
    j["division"] = {{"family", "tabulated"}, {"samples", f_.division.tabulated()->samples.to_json()}};
  }
  j["reentry"] = {{"beta0", f_.reentry.beta0.to_json()},
                  {"theta", f_.reentry.theta.to_json()},
                  {"n", f_.reentry.n}};
  j["mortality"] = {{"delta", f_.mortality.delta.to_json()}, {"gamma", f_.mortality.gamma.to_json()}};
  j["alpha_pi"] = f_.alpha_pi.to_json();
  j["derived"] = {{"tau_max", tau_max_}, {"tau_min", tau_min_}, {"rho", rho_}, {"eta", eta_}, {"r", r_}};
  return j;
}

ModelSpec ModelSpec::from_json(const Json& j) {
  ModelFamilies f;
  const Json& v = j.at("velocity");
  if (v.at("family") == "power_law") {
    f.velocity = PowerLawVelocity{v.at("coefficient").get<double>(), v.at("exponent").get<double>()};
  } else {
    f.velocity = TabulatedVelocity{Profile::from_json(v.at("samples"))};
  }
  const Json& d = j.at("delay");
  if (d.at("family") == "log_affine") {
    f.delay = LogAffineDelay{d.at("alpha").get<double>()};
  } else if (d.at("family") == "constant") {
    f.delay = ConstantDelay{d.at("value").get<double>()};
  } else {
    f.delay = TabulatedDelay{Profile::from_json(d.at("samples"))};
  }
  const Json& g = j.at("division");
  if (g.at("family") == "linear") {
    f.division = LinearDivision{g.at("kappa").get<double>()};
  } else {
    f.division = TabulatedDivision{Profile::from_json(g.at("samples"))};
  }
  const Json& b = j.at("reentry");
  f.reentry = HillReentry{Profile::from_json(b.at("beta0")), Profile::from_json(b.at("theta")),
                          b.at("n").get<double>()};
  f.mortality = MortalityProfiles{Profile::from_json(j.at("mortality").at("delta")),
                                  Profile::from_json(j.at("mortality").at("gamma"))};
  if (j.contains("alpha_pi")) f.alpha_pi = Profile::from_json(j.at("alpha_pi"));
  return build_model(std::move(f));
}

}  // namespace matsim::model
