#include "matsim/characteristics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "matsim/errors.hpp"
#include "matsim/numerics.hpp"

namespace matsim::chars {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kTableSize = 4096;
constexpr double kUTol = 1e-14;

}  // namespace

CharTables::CharTables(const model::ModelSpec& spec, Tolerances tol) : spec_(&spec), tol_(tol) {
  if (spec.velocity().tabulated()) {
    // L(m) = -int_m^1 ds/V(s), accumulated downward in u = ln m.
    const double u0 = std::log(tol_.m_floor);
    log_m_.resize(kTableSize);
    log_h_tab_.resize(kTableSize);
    for (int k = 0; k < kTableSize; ++k) {
      log_m_[k] = u0 * (1.0 - static_cast<double>(k) / (kTableSize - 1));
    }
    log_m_.back() = 0.0;
    auto integrand = [&spec](double u) {
      const double m = std::exp(u);
      return m / spec.V(m);
    };
    log_h_tab_.back() = 0.0;
    for (int k = kTableSize - 2; k >= 0; --k) {
      log_h_tab_[k] = log_h_tab_[k + 1] - numerics::integrate(integrand, log_m_[k], log_m_[k + 1],
                                                               tol_.quad_tol, 1e-300, "ln h table");
    }
    floor_slope_ = tol_.m_floor / spec.V(tol_.m_floor);
  }
  theta_one_ = theta(1.0);
}

// ---------------------------------------------------------------------------
// h and its inverse

double CharTables::log_h(double m) const {
  if (m <= 0.0) return -kInf;
  if (m >= 1.0) return 0.0;
  if (const auto* p = spec_->velocity().power_law()) {
    if (p->exponent == 1.0) return std::log(m) / p->coefficient;
    const double q = p->exponent - 1.0;
    return (1.0 - std::pow(m, -q)) / (p->coefficient * q);
  }
  const double u = std::log(m);
  if (u <= log_m_.front()) return log_h_tab_.front() + floor_slope_ * (u - log_m_.front());
  const auto it = std::upper_bound(log_m_.begin(), log_m_.end(), u);
  const std::size_t k = static_cast<std::size_t>(it - log_m_.begin());
  if (k >= log_m_.size()) return 0.0;
  if (u == log_m_[k - 1]) return log_h_tab_[k - 1];
  auto integrand = [this](double v) {
    const double s = std::exp(v);
    return s / spec_->V(s);
  };
  return log_h_tab_[k] - numerics::integrate(integrand, u, log_m_[k], tol_.quad_tol, 1e-300, "ln h");
}

double CharTables::log_h_inv(double L) const {
  if (L == -kInf) return 0.0;
  if (L >= 0.0) return 1.0;
  if (const auto* p = spec_->velocity().power_law()) {
    if (p->exponent == 1.0) return std::exp(p->coefficient * L);
    const double q = p->exponent - 1.0;
    return std::pow(1.0 - p->coefficient * q * L, -1.0 / q);
  }
  if (L <= log_h_tab_.front()) {
    return std::exp(log_m_.front() + (L - log_h_tab_.front()) / floor_slope_);
  }
  const auto it = std::upper_bound(log_h_tab_.begin(), log_h_tab_.end(), L);
  const std::size_t k = static_cast<std::size_t>(it - log_h_tab_.begin());
  if (k >= log_h_tab_.size()) return 1.0;
  if (L == log_h_tab_[k - 1]) return std::exp(log_m_[k - 1]);
  auto fdf = [this, L](double u) -> std::array<double, 2> {
    const double m = std::exp(u);
    return {log_h(m) - L, m / spec_->V(m)};
  };
  return std::exp(numerics::safe_newton(fdf, log_m_[k - 1], log_m_[k], kUTol).root);
}

double CharTables::h(double m) const { return m <= 0.0 ? 0.0 : std::exp(log_h(m)); }

double CharTables::h_inv(double u) const { return u <= 0.0 ? 0.0 : log_h_inv(std::log(u)); }

double CharTables::chi(double s, double m) const {
  if (m <= 0.0) return 0.0;
  if (s == 0.0) return m;
  return log_h_inv(log_h(m) + s);
}

// ---------------------------------------------------------------------------
// Theta, Delta

double CharTables::theta(double m) const {
  if (m <= 0.0) return 0.0;
  const double target = log_h(m);
  auto fdf = [this, target](double u) -> std::array<double, 2> {
    const double x = std::exp(u);
    return {log_h(x) + spec_->tau(x) - target,
            x / spec_->V(x) + x * spec_->delay().derivative(x)};
  };
  const double hi = std::log(m);
  double step = 1.0;
  double lo = hi - step;
  while (fdf(lo)[0] >= 0.0) {
    step *= 2.0;
    lo = hi - step;
    if (step > 1e4) throw RootNotBracketed("theta: no sign change below m");
  }
  return std::exp(numerics::safe_newton(fdf, lo, hi, kUTol).root);
}

double CharTables::theta_inv(double x) const {
  if (x <= 0.0) return 0.0;
  return log_h_inv(log_h(x) + spec_->tau(x));
}

double CharTables::delta(double m) const {
  if (m >= spec_->division().at_one()) return theta_one_;
  return theta(spec_->g_inv(m));
}

double CharTables::delta_inv(double y) const {
  if (y >= theta_one_) throw DomainError("delta_inv: argument at or above theta(1)");
  if (y <= 0.0) return 0.0;
  return spec_->g(theta_inv(y));
}

// ---------------------------------------------------------------------------
// Kernels

double CharTables::survival(const model::Profile& rate, double t, double m) const {
  if (t <= 0.0) return 1.0;
  if (rate.is_constant()) return std::exp(-rate.constant_value() * t);
  if (m <= 0.0) return std::exp(-rate(0.0) * t);
  auto integrand = [this, &rate, m](double s) { return rate(chi(-s, m)); };
  return std::exp(-numerics::integrate(integrand, 0.0, t, tol_.quad_tol, 1e-14, "survival kernel"));
}

// exp(-int_0^t V'(chi(-s,m)) ds) = V(chi(-t,m)) / V(m), since d chi/ds = V(chi).
double CharTables::velocity_ratio(double t, double m) const {
  if (t <= 0.0) return 1.0;
  if (m <= 0.0) return std::exp(-spec_->dV(0.0) * t);
  if (const auto* p = spec_->velocity().power_law()) {
    if (p->exponent == 1.0) return std::exp(-p->coefficient * t);
    return std::pow(chi(-t, m) / m, p->exponent);
  }
  return spec_->V(chi(-t, m)) / spec_->V(m);
}

double CharTables::kernel_K(double t, double m) const {
  return survival(spec_->mortality().delta, t, m) * velocity_ratio(t, m);
}

double CharTables::kernel_H(double t, double m) const {
  return survival(spec_->mortality().gamma, t, m) * velocity_ratio(t, m);
}

double CharTables::xi(double t, double m) const {
  const auto& g = spec_->division();
  if (m > g.at_one()) return 0.0;
  return g.inverse_derivative(m) * kernel_H(t, g.inverse(m));
}

double CharTables::pi(double t, double m) const {
  return spec_->alpha_pi()(m) * kernel_H(t, m);
}

double CharTables::xi_bar(double m) const { return xi(spec_->tau(delta(m)), m); }

double CharTables::pi_bar(double m) const { return pi(spec_->tau(theta(m)), m); }

// ---------------------------------------------------------------------------
// Schedule

PropagationSchedule CharTables::schedule(double b) const {
  if (!(b > 0.0 && b < 1.0)) throw DomainError("schedule: b must lie in (0,1)");
  const double g1 = spec_->division().at_one();
  PropagationSchedule s;
  s.b_seq.push_back(spec_->g(b));
  if (s.b_seq.front() >= theta_one_) {
    s.N = 0;
    s.b_seq.push_back(g1);
    s.b_seq.push_back(g1);
  } else {
    while (s.b_seq.back() < theta_one_) {
      const double next = delta_inv(s.b_seq.back());
      if (!(next > s.b_seq.back())) {
        throw DomainError("schedule: Delta(m) < m fails, iteration stalls");
      }
      s.b_seq.push_back(next);
      if (s.b_seq.size() > 100000) throw DomainError("schedule: iteration does not reach theta(1)");
    }
    s.N = static_cast<int>(s.b_seq.size()) - 2;
    s.b_seq.push_back(g1);
  }
  const double tau_max = spec_->tau_max();
  s.t_bar = (log_h(g1) - log_h(s.b_seq.front())) + (s.N + 2) * tau_max;
  s.t_full = s.t_bar + tau_max - log_h(g1);
  return s;
}

// ---------------------------------------------------------------------------

DeltaStrictResult check_delta_strict(const CharTables& tables) {
  const model::ModelSpec& spec = tables.model();
  const auto* pl = spec.velocity().power_law();
  const auto* lin = spec.division().linear();
  DeltaStrictResult out;
  if (pl && pl->exponent == 1.0 && lin) {
    // Delta(m) < m  <=>  kappa m < theta^{-1}(m) = h^{-1}(h(m) e^{tau(m)})
    //               <=>  kappa < e^{alpha_V tau(m)}; uniformly in m iff it holds at m = 0.
    const double c = pl->coefficient;
    const double kappa = lin->kappa;
    if (const auto* la = spec.delay().log_affine()) {
      out.holds = std::pow(la->alpha, c) > kappa;
      const double crossing = std::pow(kappa, 1.0 / c) - la->alpha;
      if (!out.holds && crossing > 0.0) out.witness = std::min(0.5 * crossing, 1.0 / kappa);
      return out;
    }
    if (const auto* cd = spec.delay().constant()) {
      out.holds = kappa * std::exp(-c * cd->value) < 1.0;
      if (!out.holds && kappa * std::exp(-c * cd->value) > 1.0) out.witness = 0.5 / kappa;
      return out;
    }
  }
  for (double m : model::validation_grid()) {
    if (!(tables.delta(m) < m)) {
      out.holds = false;
      out.witness = m;
      return out;
    }
  }
  return out;
}

}  // namespace matsim::chars
