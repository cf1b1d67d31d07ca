#include "matsim/immature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>

#include "matsim/errors.hpp"
#include "matsim/numerics.hpp"

namespace matsim::immature {

// ---------------------------------------------------------------------------
// Hill function at m = 0

double Hill::beta(double x) const {
  const double xp = x > 0.0 ? x : 0.0;
  if (n == 1.0) return beta0 * theta / (theta + xp);
  if (n == 2.0) return beta0 * theta * theta / (theta * theta + xp * xp);
  const double tn = std::pow(theta, n);
  return beta0 * tn / (tn + std::pow(xp, n));
}

double Hill::df(double x) const {
  if (x <= 0.0) return beta0;
  const double tn = std::pow(theta, n);
  const double xn = std::pow(x, n);
  const double d = tn + xn;
  return beta0 * tn * (tn + xn - n * xn) / (d * d);
}

double Hill::F(double x) const {
  if (x <= 0.0) return 0.5 * beta0 * x * x;
  if (n == 1.0) return beta0 * theta * (x - theta * std::log1p(x / theta));
  if (n == 2.0) return 0.5 * beta0 * theta * theta * std::log1p((x / theta) * (x / theta));
  // beta0 theta^2 int_0^{x/theta} v / (1 + v^n) dv: alternating series near
  // 0, quadrature on an interval of length >= 1/4 where the integrand is smooth
  const double u = x / theta;
  const double u0 = u <= 0.5 ? u : 0.25;
  const double un = std::pow(u0, n);
  double sum = 0.0;
  double power = u0 * u0;
  for (int k = 0; k < 200; ++k, power *= -un) {
    const double term = power / (k * n + 2.0);
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  if (u > u0) {
    sum += numerics::integrate([this](double v) { return v / (1.0 + std::pow(v, n)); }, u0, u,
                               1e-12, 1e-300, "Lyapunov primitive");
  }
  return beta0 * theta * theta * sum;
}

double Hill::x_bar() const {
  if (!(n > 1.0)) throw DomainError("x_bar: Hill exponent must exceed 1");
  return theta / std::pow(n - 1.0, 1.0 / n);
}

double ImmatureParams::xi0(double t) const { return xi_scale * std::exp(-eta * t); }
double ImmatureParams::pi0(double t) const { return pi_scale * std::exp(-eta * t); }

ImmatureParams ImmatureParams::from_model(const chars::CharTables& tables) {
  const model::ModelSpec& spec = tables.model();
  ImmatureParams p;
  p.rho = spec.rho();
  p.eta = spec.eta();
  p.r = spec.r();
  p.hill = Hill{spec.reentry().beta0(0.0), spec.reentry().theta(0.0), spec.reentry().n};
  p.xi_scale = spec.division().inverse_derivative(0.0);
  p.pi_scale = spec.alpha_pi()(0.0);
  p.xi_bar0 = tables.xi_bar(0.0);
  p.pi_bar0 = tables.pi_bar(0.0);
  return p;
}

// ---------------------------------------------------------------------------
// Quintic Hermite on one mesh interval

namespace {

double quintic(const Knot& a, const Knot& b, double t) {
  const double h = b.t - a.t;
  const double s = (t - a.t) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double s4 = s3 * s;
  const double s5 = s4 * s;
  const double h0 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
  const double h1 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
  const double h2 = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5;
  const double h3 = 0.5 * s3 - s4 + 0.5 * s5;
  const double h4 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
  const double h5 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
  return h0 * a.x + h * (h1 * a.dx + h4 * b.dx) + h * h * (h2 * a.ddx + h3 * b.ddx) + h5 * b.x;
}

double quintic_derivative(const Knot& a, const Knot& b, double t) {
  const double h = b.t - a.t;
  const double s = (t - a.t) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double s4 = s3 * s;
  const double d0 = -30.0 * s2 + 60.0 * s3 - 30.0 * s4;
  const double d1 = 1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4;
  const double d2 = s - 4.5 * s2 + 6.0 * s3 - 2.5 * s4;
  const double d3 = 1.5 * s2 - 4.0 * s3 + 2.5 * s4;
  const double d4 = -12.0 * s2 + 28.0 * s3 - 15.0 * s4;
  const double d5 = 30.0 * s2 - 60.0 * s3 + 30.0 * s4;
  return (d0 * a.x + d5 * b.x) / h + (d1 * a.dx + d4 * b.dx) + h * (d2 * a.ddx + d3 * b.ddx);
}

double dense_in(const std::vector<Knot>& seg, double t, bool derivative) {
  if (seg.size() == 1) return derivative ? seg.front().dx : seg.front().x;
  auto it = std::upper_bound(seg.begin(), seg.end(), t, [](double v, const Knot& k) { return v < k.t; });
  std::size_t i = static_cast<std::size_t>(it - seg.begin());
  i = std::clamp<std::size_t>(i, 1, seg.size() - 1);
  const Knot& a = seg[i - 1];
  const Knot& b = seg[i];
  if (t == b.t) return derivative ? b.dx : b.x;
  if (t == a.t) return derivative ? a.dx : a.x;
  return derivative ? quintic_derivative(a, b, t) : quintic(a, b, t);
}

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

using State = std::array<double, 2>;

State axpy(const State& y, double h, std::initializer_list<std::pair<double, const State*>> terms) {
  State out = y;
  for (const auto& [c, k] : terms) {
    out[0] += h * c * (*k)[0];
    out[1] += h * c * (*k)[1];
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Trajectory

const Knot* Trajectory::locate(double t, std::size_t& seg) const {
  const double k = std::floor(t / r_);
  seg = static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(segments_.size() - 1)));
  return segments_[seg].data();
}

double Trajectory::x(double t) const {
  std::size_t seg = 0;
  locate(t, seg);
  return dense_in(segments_[seg], t, false);
}

double Trajectory::dx(double t) const {
  std::size_t seg = 0;
  locate(t, seg);
  return dense_in(segments_[seg], t, true);
}

double Trajectory::integrate_along(double a, double b,
                                   const std::function<double(double, double)>& integrand) const {
  if (b <= a) return 0.0;
  double total = 0.0;
  for (const auto& seg : segments_) {
    if (seg.size() < 2 || seg.back().t <= a || seg.front().t >= b) continue;
    for (std::size_t i = 1; i < seg.size(); ++i) {
      const double lo = std::max(a, seg[i - 1].t);
      const double hi = std::min(b, seg[i].t);
      if (hi <= lo) continue;
      const Knot& ka = seg[i - 1];
      const Knot& kb = seg[i];
      total += numerics::gauss_legendre5(
          [&](double s) { return integrand(s, quintic(ka, kb, s)); }, lo, hi);
    }
  }
  return total;
}

double Trajectory::y(double t) const {
  const double eta = p_.eta;
  const Hill& hill = p_.hill;
  auto source = [&](double s, double xs_) { return std::exp(-eta * (t - s)) * hill.f(xs_); };
  if (t >= r_) return integrate_along(t - r_, t, source);
  double tail = 0.0;
  if (t > 0.0) {
    tail = numerics::integrate(gamma0_, 0.0, r_ - t, 1e-12, 1e-15, "psi");
  } else {
    tail = gamma_integral_;
  }
  return std::exp(-eta * t) * tail + integrate_along(0.0, t, source);
}

// ---------------------------------------------------------------------------
// Integration

Trajectory solve(const ImmatureParams& p, double mu0, const std::function<double(double)>& gamma0,
                 double T, const IntegratorOptions& opts) {
  if (!(p.r > 0.0)) throw DomainError("immature: r must be positive");
  Trajectory tr;
  tr.p_ = p;
  tr.r_ = p.r;
  tr.horizon_ = T;
  tr.gamma0_ = gamma0;
  tr.gamma_integral_ = numerics::integrate(gamma0, 0.0, p.r, 1e-12, 1e-15, "Gamma_bar(0)");
  tr.derivative_jump_at_r = std::abs(gamma0(0.0) - p.hill.f(mu0)) > 1e-9;

  const double r = p.r;
  const Hill& hill = p.hill;
  const double fd = 1e-6 * r;
  auto gamma0_prime = [&](double a) {
    const double lo = std::max(0.0, a - fd);
    const double hi = std::min(r, a + fd);
    return (gamma0(hi) - gamma0(lo)) / (hi - lo);
  };

  const int n_segments = std::max(1, static_cast<int>(std::ceil(T / r - 1e-12)));
  tr.segments_.resize(n_segments);

  const double h_max = opts.fixed_steps_per_delay > 0 ? r / opts.fixed_steps_per_delay
                                                      : r * opts.max_step_fraction;
  double h = h_max;

  for (int k = 0; k < n_segments; ++k) {
    const double t0 = k * r;
    const double t1 = (k + 1) * r;
    const std::vector<Knot>* prev = k > 0 ? &tr.segments_[k - 1] : nullptr;

    // delayed inputs: S enters x', Q enters y'
    auto S = [&](double t) {
      if (!prev) return 2.0 * p.xi0(t) * gamma0(r - t);
      return 2.0 * p.xi_bar0 * hill.f(dense_in(*prev, t - r, false));
    };
    auto Q = [&](double t) {
      if (!prev) return p.pi0(t) * gamma0(r - t);
      return p.pi_bar0 * hill.f(dense_in(*prev, t - r, false));
    };
    auto S_prime = [&](double t) {
      if (!prev) {
        return -2.0 * p.eta * p.xi0(t) * gamma0(r - t) - 2.0 * p.xi0(t) * gamma0_prime(r - t);
      }
      const double z = dense_in(*prev, t - r, false);
      return 2.0 * p.xi_bar0 * hill.df(z) * dense_in(*prev, t - r, true);
    };
    auto rhs = [&](double t, const State& u) -> State {
      return {-p.rho * u[0] - hill.f(u[0]) + S(t), -p.eta * u[1] + hill.f(u[0]) - Q(t)};
    };
    auto make_knot = [&](double t, const State& u, double dx) {
      return Knot{t, u[0], dx, (-p.rho - hill.df(u[0])) * dx + S_prime(t), u[1]};
    };

    State u;
    if (k == 0) {
      u = {mu0, tr.gamma_integral_};
    } else {
      const Knot& last = tr.segments_[k - 1].back();
      u = {last.x, last.y_ode};
    }
    auto& seg = tr.segments_[k];
    State k1 = rhs(t0, u);
    seg.push_back(make_knot(t0, u, k1[0]));
    double t = t0;
    while (t < t1) {
      bool last_step = false;
      double step = std::min(h, h_max);
      if (t + step >= t1 - 1e-12 * r) {
        step = t1 - t;
        last_step = true;
      }
      const State k2 = rhs(t + c2 * step, axpy(u, step, {{a21, &k1}}));
      const State k3 = rhs(t + c3 * step, axpy(u, step, {{a31, &k1}, {a32, &k2}}));
      const State k4 = rhs(t + c4 * step, axpy(u, step, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
      const State k5 =
          rhs(t + c5 * step, axpy(u, step, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
      const State k6 = rhs(t + step, axpy(u, step, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4},
                                                    {a65, &k5}}));
      const State un = axpy(u, step, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
      const double t_new = last_step ? t1 : t + step;
      const State k7 = rhs(t_new, un);

      double err = 0.0;
      if (opts.fixed_steps_per_delay <= 0) {
        for (int i = 0; i < 2; ++i) {
          const double e = step * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                                   e7 * k7[i]);
          const double sc = opts.abs_tol + opts.rel_tol * std::max(std::abs(u[i]), std::abs(un[i]));
          err = std::max(err, std::abs(e) / sc);
        }
        if (err > 1.0) {
          ++tr.rejected;
          h = step * std::max(0.2, 0.9 * std::pow(err, -0.2));
          if (h < opts.min_step * std::max(1.0, std::abs(t))) {
            throw StepSizeUnderflow("immature: step size underflow at t = " + std::to_string(t));
          }
          continue;
        }
      }
      ++tr.steps;
      t = t_new;
      u = un;
      k1 = k7;
      seg.push_back(make_knot(t, u, k7[0]));
      if (opts.fixed_steps_per_delay <= 0) {
        const double grow = err > 0.0 ? std::min(5.0, 0.9 * std::pow(err, -0.2)) : 5.0;
        if (!last_step) h = std::min(h_max, step * grow);
        else h = std::min(h_max, std::max(h, step * grow));
      }
    }
  }

  const double dt = r / opts.samples_per_delay;
  const long n_out = static_cast<long>(std::floor(T / dt + 1e-9));
  for (long i = 0; i <= n_out; ++i) tr.times.push_back(i * dt);
  if (T - tr.times.back() > 1e-12 * r) tr.times.push_back(T);
  tr.xs.reserve(tr.times.size());
  tr.ys.reserve(tr.times.size());
  for (double t : tr.times) {
    tr.xs.push_back(tr.x(t));
    tr.ys.push_back(tr.y(t));
  }
  return tr;
}

Trajectory solve_initial_phase(const ImmatureParams& p, double mu0,
                               const std::function<double(double)>& gamma0,
                               const IntegratorOptions& opts) {
  return solve(p, mu0, gamma0, p.r, opts);
}

Trajectory solve_for(const chars::CharTables& tables, const model::InitialData& data, double T,
                     const IntegratorOptions& opts) {
  const ImmatureParams p = ImmatureParams::from_model(tables);
  auto gamma = data.Gamma;
  return solve(p, data.mu(0.0), [gamma](double a) { return gamma(0.0, a); }, T, opts);
}

// ---------------------------------------------------------------------------
// Stability objects

double asymptotic_y(const ImmatureParams& p, double C) {
  const double fc = p.hill.f(C);
  if (p.eta > 0.0) return -std::expm1(-p.eta * p.r) / p.eta * fc;
  return p.r * fc;
}

double lyapunov_J(const ImmatureParams& p, const std::function<double(double)>& segment) {
  const double squares = numerics::integrate(
      [&](double s) {
        const double v = p.hill.f(segment(s));
        return v * v;
      },
      0.0, p.r, 1e-12, 1e-300, "Lyapunov functional");
  return p.hill.F(segment(p.r)) + p.xi_bar0 * squares;
}

double lyapunov_J(const ImmatureParams& p, const Trajectory& traj, double t) {
  const double squares = traj.integrate_along(t - p.r, t, [&](double, double x) {
    const double v = p.hill.f(x);
    return v * v;
  });
  return p.hill.F(traj.x(t)) + p.xi_bar0 * squares;
}

double lyapunov_rate(const ImmatureParams& p, double u) {
  const double b = p.hill.beta(u);
  return (p.rho - (2.0 * p.xi_bar0 - 1.0) * b) * b * u * u;
}

StabilityClass classify_stability(const ImmatureParams& p) {
  const double margin = p.rho - (2.0 * p.xi_bar0 - 1.0) * p.hill.beta(0.0);
  return {margin > 0.0 ? Verdict::GloballyStable : Verdict::Unstable, margin};
}

namespace {

using cplx = std::complex<double>;

struct Rect {
  double x0, x1, y0, y1;
};

// Winding number of phi around the rectangle boundary; NaN if phi nearly
// vanishes on the boundary.
double winding(const std::function<cplx(cplx)>& phi, const Rect& R, int depth = 0) {
  const std::array<cplx, 5> corners = {cplx(R.x0, R.y0), cplx(R.x1, R.y0), cplx(R.x1, R.y1),
                                       cplx(R.x0, R.y1), cplx(R.x0, R.y0)};
  double total = 0.0;
  for (int side = 0; side < 4; ++side) {
    std::function<double(cplx, cplx, cplx, cplx, int)> walk = [&](cplx a, cplx b, cplx fa, cplx fb,
                                                               int d) -> double {
      const double dphase = std::arg(fb / fa);
      if (std::abs(dphase) < 0.5 || d > 40) return dphase;
      const cplx mid = 0.5 * (a + b);
      const cplx fm = phi(mid);
      if (std::abs(fm) < 1e-13) return std::nan("");
      return walk(a, mid, fa, fm, d + 1) + walk(mid, b, fm, fb, d + 1);
    };
    const cplx a = corners[side];
    const cplx b = corners[side + 1];
    const int pieces = 64;
    cplx fa = phi(a);
    for (int i = 1; i <= pieces; ++i) {
      const cplx q = a + (b - a) * (static_cast<double>(i) / pieces);
      const cplx fq = phi(q);
      if (std::abs(fq) < 1e-13 || std::abs(fa) < 1e-13) return std::nan("");
      total += walk(a + (b - a) * (static_cast<double>(i - 1) / pieces), q, fa, fq, depth);
      fa = fq;
    }
  }
  return total / (2.0 * M_PI);
}

void locate_roots(const std::function<cplx(cplx)>& phi, const std::function<cplx(cplx)>& dphi,
                  Rect R, int depth, std::vector<cplx>& roots) {
  if (depth > 60) throw SearchInconclusive("characteristic_root: subdivision limit reached");
  double w = winding(phi, R);
  if (std::isnan(w)) {
    // nudge the rectangle off a boundary zero
    const double dx = 1e-7 * (R.x1 - R.x0 + 1.0);
    R.x1 += dx;
    R.y1 += dx;
    w = winding(phi, R);
    if (std::isnan(w)) throw SearchInconclusive("characteristic_root: zero on search boundary");
  }
  const long count = std::lround(w);
  if (count <= 0) return;
  if (count == 1) {
    cplx z(0.5 * (R.x0 + R.x1), 0.5 * (R.y0 + R.y1));
    for (int it = 0; it < 100; ++it) {
      const cplx step = phi(z) / dphi(z);
      z -= step;
      if (std::abs(step) < 1e-14 * (1.0 + std::abs(z))) break;
    }
    const double slack = 1e-9 * (1.0 + std::abs(z));
    if (z.real() >= R.x0 - slack && z.real() <= R.x1 + slack && z.imag() >= R.y0 - slack &&
        z.imag() <= R.y1 + slack && std::abs(phi(z)) < 1e-9) {
      roots.push_back(z);
      return;
    }
  }
  const double split = 0.5 + 0.0123;
  if (R.x1 - R.x0 >= R.y1 - R.y0) {
    const double xm = R.x0 + split * (R.x1 - R.x0);
    locate_roots(phi, dphi, {R.x0, xm, R.y0, R.y1}, depth + 1, roots);
    locate_roots(phi, dphi, {xm, R.x1, R.y0, R.y1}, depth + 1, roots);
  } else {
    const double ym = R.y0 + split * (R.y1 - R.y0);
    locate_roots(phi, dphi, {R.x0, R.x1, R.y0, ym}, depth + 1, roots);
    locate_roots(phi, dphi, {R.x0, R.x1, ym, R.y1}, depth + 1, roots);
  }
}

}  // namespace

double characteristic_root(const ImmatureParams& p) {
  const double a = p.rho + p.hill.beta(0.0);
  const double b = 2.0 * p.xi_bar0 * p.hill.beta(0.0);
  const double r = p.r;
  if (b == 0.0) return -a;
  // real root: lambda + a - b e^{-lambda r} is increasing for b > 0
  auto real_fdf = [&](double l) -> std::array<double, 2> {
    const double e = b * std::exp(-l * r);
    return {l + a - e, 1.0 + r * e};
  };
  const double lo = -a;
  const double hi = std::max(0.0, b - a) + 1.0;
  double mu = numerics::safe_newton(real_fdf, lo, hi, 1e-15).root;
  if (std::abs(real_fdf(mu)[0]) > 1e-12 * (1.0 + a + b)) {
    mu = numerics::bisect([&](double l) { return real_fdf(l)[0]; }, lo, hi, 1e-15).root;
  }

  // Any root with Re >= mu + eps satisfies |lambda + a| = b e^{-Re r} <= b e^{-mu r}.
  auto phi = [&](cplx l) { return l + a - b * std::exp(-l * r); };
  auto dphi = [&](cplx l) { return 1.0 + r * b * std::exp(-l * r); };
  const double eps = 1e-6 * (1.0 + std::abs(mu));
  const double bound = b * std::exp(-mu * r);
  const Rect strip{mu + eps, std::max(mu + eps + 1.0, bound - a + 1.0), -(bound + 1.0), bound + 1.0};
  std::vector<cplx> roots;
  locate_roots(phi, dphi, strip, 0, roots);
  double best = mu;
  for (const cplx& z : roots) best = std::max(best, z.real());
  return best;
}

UnboundedCheck unbounded_scenario_check(const ImmatureParams& p, double mu0,
                                        const std::function<double(double)>& gamma0,
                                        int grid_points) {
  UnboundedCheck out;
  if (p.rho != 0.0) out.reasons.push_back("rho = 0 fails");
  if (!(p.hill.n > 1.0)) {
    out.reasons.push_back("Hill exponent n > 1 fails (x beta(0,x) never decreasing)");
  } else if (!(mu0 > p.hill.x_bar())) {
    out.reasons.push_back("mu(0) > x_bar fails");
  }
  if (std::abs(gamma0(0.0) - p.hill.f(mu0)) > 1e-9) out.reasons.push_back("compatibility fails");
  const double g00 = gamma0(0.0);
  for (int i = 0; i < grid_points; ++i) {
    const double t = p.r * i / (grid_points - 1);
    if (!(2.0 * p.xi0(t) * gamma0(p.r - t) > g00)) {
      out.reasons.push_back("2 xi(t,0) Gamma(0,r-t) > Gamma(0,0) fails at t = " + std::to_string(t));
      break;
    }
  }
  out.applies = out.reasons.empty();
  return out;
}

std::optional<double> converged_limit(const Trajectory& traj, double rel_tv) {
  const double T = traj.times.back();
  double tv = 0.0;
  double scale = 0.0;
  for (std::size_t i = 1; i < traj.times.size(); ++i) {
    if (traj.times[i] < T - traj.r()) continue;
    tv += std::abs(traj.xs[i] - traj.xs[i - 1]);
    scale = std::max(scale, std::abs(traj.xs[i]));
  }
  if (scale == 0.0) return 0.0;
  if (tv <= rel_tv * scale) return traj.xs.back();
  return std::nullopt;
}

const char* to_string(Verdict v) {
  return v == Verdict::GloballyStable ? "GloballyStable" : "Unstable";
}

}  // namespace matsim::immature
