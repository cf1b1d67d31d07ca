#include "matsim/structured_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <span>
#include <string>
#include <utility>

#include "matsim/errors.hpp"
#include "matsim/monotone_cubic.hpp"

namespace matsim::solver {

namespace {

// Weights of the Lagrange interpolant through x[0..n) evaluated at z.
void lagrange_weights(const double* x, int n, double z, double* w) {
  for (int i = 0; i < n; ++i) {
    double p = 1.0;
    for (int k = 0; k < n; ++k) {
      if (k != i) p *= (z - x[k]) / (x[i] - x[k]);
    }
    w[i] = p;
  }
}

// x beta(m, x) and its x-derivative; beta is held at beta0 for x < 0.
double hill_flux(const model::HillReentry& re, double b0, double th, double x) {
  return re.at(b0, th, x) * x;
}

double hill_flux_derivative(const model::HillReentry& re, double b0, double th, double x) {
  if (x <= 0.0) return re.at(b0, th, 0.0);
  const double tn = std::pow(th, re.n);
  const double xn = std::pow(x, re.n);
  const double d = tn + xn;
  return b0 * tn * (tn + (1.0 - re.n) * xn) / (d * d);
}

double hill_rate(const model::ModelSpec& spec) {
  const auto& re = spec.reentry();
  return re.beta0.max_value() * (1.0 + re.n / 4.0);
}

}  // namespace

ResolvedGrid resolve_grid(const model::ModelSpec& spec, const GridParams& params) {
  const double tau_min = spec.tau_min();
  double dt = params.dt;
  if (!(dt > 0.0)) {
    dt = tau_min / 20.0;
    const double L = hill_rate(spec);
    if (L > 0.0) dt = std::min(dt, 0.5 / L);
  }
  if (dt > 0.5 * tau_min) {
    throw HistoryUnderflow("time step " + std::to_string(dt) + " exceeds tau_min/2 = " +
                           std::to_string(0.5 * tau_min));
  }
  int M = params.M;
  if (M <= 0) {
    if (!(params.depth > 0.0)) throw ConfigError("grid depth must be positive");
    M = static_cast<int>(std::lround(params.depth / dt)) + 1;
  }
  if (M < 3) throw ConfigError("grid needs at least 3 nodes above m = 0");
  return {dt, M};
}

MaturityGrid::MaturityGrid(const chars::CharTables& tables, ResolvedGrid g)
    : M_(g.M), dt_(g.dt), m_(static_cast<std::size_t>(g.M) + 1) {
  m_[0] = 0.0;
  for (int j = 1; j < M_; ++j) m_[j] = tables.log_h_inv(log_h(j));
  m_[M_] = 1.0;
}

SpaceTimeHistory::SpaceTimeHistory(const MaturityGrid& grid, std::function<double(double)> mu,
                                   std::size_t depth)
    : grid_(&grid), mu_(std::move(mu)), depth_(std::max<std::size_t>(depth, 4)) {}

void SpaceTimeHistory::push(double t, const std::vector<double>& N) {
  const long n = std::lround(t / grid_->dt());
  if (n != n_last_ + 1) throw PreconditionViolated("history snapshots must be consecutive");
  Entry e{n, N, std::vector<double>(static_cast<std::size_t>(grid_->M()))};
  monotone_slopes_uniform(grid_->dt(), std::span<const double>(e.N.data() + 1, grid_->M()),
                          std::span<double>(e.slope));
  buf_.push_back(std::move(e));
  while (buf_.size() > depth_) buf_.pop_front();
  n_last_ = n;
}

const SpaceTimeHistory::Entry& SpaceTimeHistory::entry(long n) const {
  if (buf_.empty() || n < buf_.front().n || n > n_last_) {
    throw HistoryUnderflow("history step " + std::to_string(n) + " not stored");
  }
  return buf_[static_cast<std::size_t>(n - buf_.front().n)];
}

double SpaceTimeHistory::spatial(const Entry& e, double L) const {
  const int M = grid_->M();
  const double dt = grid_->dt();
  const double L1 = grid_->log_h(1);
  if (L >= 0.0) return e.N[M];
  if (L <= L1) return e.N[0] + (e.N[1] - e.N[0]) * std::exp(L - L1);
  const int i = std::min(static_cast<int>((L - L1) / dt), M - 2);
  const int a = 1 + i;
  const double s = (L - grid_->log_h(a)) / dt;
  return hermite(s, dt, e.N[a], e.N[a + 1], e.slope[a - 1], e.slope[a]);
}

double SpaceTimeHistory::at_step(long n, double L) const { return spatial(entry(n), L); }

double SpaceTimeHistory::lookup(double t, double m, double L) const {
  if (t <= 0.0) return mu_(m);
  const double p = t / grid_->dt();
  const long lo = buf_.empty() ? 0 : std::max<long>(0, buf_.front().n);
  const long hi = n_last_;
  if (p > static_cast<double>(hi) + 1e-9) {
    throw HistoryUnderflow("lookup ahead of the stored history");
  }
  const long na = static_cast<long>(std::floor(p));
  if (na < lo) throw HistoryUnderflow("lookup older than the stored history");
  const int count = static_cast<int>(std::min<long>(4, hi - lo + 1));
  const long s0 = std::clamp(na - 1, lo, hi - count + 1);
  double x[4];
  double w[4];
  for (int i = 0; i < count; ++i) x[i] = static_cast<double>(s0 + i);
  lagrange_weights(x, count, p, w);
  double v = 0.0;
  for (int i = 0; i < count; ++i) v += w[i] * spatial(entry(s0 + i), L);
  return v;
}

FieldStepper::FieldStepper(const chars::CharTables& tables, const model::InitialData& data,
                           ResolvedGrid g, const immature::Trajectory& boundary, bool compute_P)
    : tables_(&tables),
      data_(&data),
      boundary_(&boundary),
      compute_P_(compute_P),
      grid_(tables, g),
      hist_(grid_, data.mu,
            static_cast<std::size_t>(std::ceil(tables.model().tau_max() / g.dt)) + 4) {
  const auto& spec = tables.model();
  const double dt = g.dt;
  if (dt > 0.5 * spec.tau_min()) {
    throw HistoryUnderflow("time step exceeds tau_min/2");
  }
  const double root3 = std::sqrt(3.0) / 6.0;
  const double L_g_one = tables.log_h(spec.division().at_one());
  const int M = grid_.M();
  cache_.resize(static_cast<std::size_t>(M) + 1);
  for (int j = 1; j <= M; ++j) {
    NodeCache& c = cache_[j];
    const double mj = grid_.m()[j];
    const double Lj = grid_.log_h(j);
    c.K = tables.kernel_K(dt, mj);
    c.H = tables.kernel_H(dt, mj);
    c.q[0] = make_point(j, dt * (0.5 - root3));
    c.q[1] = make_point(j, dt * (0.5 + root3));
    const double cross = dt - (Lj - L_g_one);  // where m(t + sigma) = g(1)
    if (cross > 0.0 && cross < dt) {
      c.f[0] = make_point(j, cross * (0.5 - root3));
      c.f[1] = make_point(j, cross * (0.5 + root3));
      c.f_weight = 0.5 * cross;
      c.f_end = cross;
    } else {
      c.f[0] = c.q[0];
      c.f[1] = c.q[1];
      c.f_weight = 0.5 * dt;
      c.f_end = cross >= dt ? dt : 0.0;
    }
    const double m0 = tables.log_h_inv(Lj - dt);
    const double mf = tables.log_h_inv(Lj - dt + c.f_end);
    c.tauD0 = spec.tau(tables.delta(m0));
    c.tauD1 = spec.tau(tables.delta(mf));
    c.tauTh0 = spec.tau(tables.theta(m0));
    c.tauTh1 = spec.tau(tables.theta(mj));
  }

  cur_.t = 0.0;
  cur_.N.resize(static_cast<std::size_t>(M) + 1);
  cur_.P.assign(static_cast<std::size_t>(M) + 1, 0.0);
  for (int j = 0; j <= M; ++j) cur_.N[j] = data.mu(grid_.m()[j]);
  cur_.N[0] = boundary.x(0.0);
  if (compute_P_) {
    for (int j = 1; j <= M; ++j) cur_.P[j] = model::gamma_bar(tables, data, grid_.m()[j]);
    cur_.P[0] = boundary.y(0.0);
  }
  hist_.push(0.0, cur_.N);
  recent_.push_front(cur_);
  diag_.min_N = *std::min_element(cur_.N.begin(), cur_.N.end());
  diag_.min_P = *std::min_element(cur_.P.begin(), cur_.P.end());
  diag_.boundary_gap_scale = tables.h(grid_.m()[1]);
}

FieldStepper::GaussPoint FieldStepper::make_point(int j, double sigma) {
  const auto& tables = *tables_;
  const auto& spec = tables.model();
  const auto& re = spec.reentry();
  const double dt = grid_.dt();
  const double mj = grid_.m()[j];
  GaussPoint gp{};
  gp.sigma = sigma;
  gp.L = grid_.log_h(j) - (dt - sigma);
  gp.m = tables.log_h_inv(gp.L);
  gp.K = tables.kernel_K(dt - sigma, mj);
  gp.H = tables.kernel_H(dt - sigma, mj);
  gp.b0 = re.beta0(gp.m);
  gp.th = re.theta(gp.m);

  gp.D = tables.delta(gp.m);
  gp.LD = tables.log_h(gp.D);
  gp.tauD = spec.tau(gp.D);
  gp.b0D = re.beta0(gp.D);
  gp.thD = re.theta(gp.D);
  if (gp.m > spec.division().at_one()) {
    gp.xibar = 0.0;
  } else {
    gp.xibar = tables.xi_bar(gp.m);
    gp.LG = tables.log_h(spec.g_inv(gp.m));
    // size of the F discontinuity where the initial layer ends
    const double left =
        2.0 * gp.xibar * data_->Gamma(tables.log_h_inv(gp.LG - gp.tauD), 0.0);
    const double muD = data_->mu(gp.D);
    const double right = 2.0 * gp.xibar * re.at(gp.b0D, gp.thD, muD) * muD;
    const double scale = std::max({std::abs(left), std::abs(right), 1e-300});
    diag_.max_branch_jump = std::max(diag_.max_branch_jump, std::abs(left - right) / scale);
  }

  gp.Th = tables.theta(gp.m);
  gp.LTh = tables.log_h(gp.Th);
  gp.tauTh = spec.tau(gp.Th);
  gp.pibar = tables.pi_bar(gp.m);
  gp.b0Th = re.beta0(gp.Th);
  gp.thTh = re.theta(gp.Th);
  return gp;
}

double FieldStepper::F_at(const GaussPoint& g, double s) {
  if (g.xibar == 0.0) return 0.0;
  const auto& spec = tables_->model();
  if (s <= g.tauD) {
    const double a = g.tauD - s;
    return 2.0 * tables_->xi(s, g.m) * data_->Gamma(tables_->log_h_inv(g.LG - s), a);
  }
  const double x = hist_.lookup(s - g.tauD, g.D, g.LD);
  return 2.0 * g.xibar * spec.reentry().at(g.b0D, g.thD, x) * x;
}

double FieldStepper::G_at(const GaussPoint& g, double s) const {
  const auto& spec = tables_->model();
  if (s <= g.tauTh) {
    const double a = g.tauTh - s;
    return tables_->pi(s, g.m) * data_->Gamma(tables_->log_h_inv(g.L - s), a);
  }
  const double x = hist_.lookup(s - g.tauTh, g.Th, g.LTh);
  return g.pibar * spec.reentry().at(g.b0Th, g.thTh, x) * x;
}

// Offset sigma in (0, hi) at which t + sigma = tau(Delta(m)) (or tau(Theta(m)))
// along the characteristic of node j; -1 when the step does not cross it.
double FieldStepper::sigma_of_layer_end(int j, double t, double hi, bool division) const {
  const NodeCache& c = cache_[j];
  const double a0 = division ? c.tauD0 : c.tauTh0;
  const double a1 = division ? c.tauD1 : c.tauTh1;
  if (!(hi > 0.0) || !(t < a0 && t + hi > a1)) return -1.0;
  const auto& spec = tables_->model();
  const double base = grid_.log_h(j) - grid_.dt();
  auto phi = [&](double sigma) {
    const double m = tables_->log_h_inv(base + sigma);
    const double img = division ? tables_->delta(m) : tables_->theta(m);
    return t + sigma - spec.tau(img);
  };
  double lo = 0.0;
  double up = hi;
  for (int i = 0; i < 60 && up - lo > 1e-15 * grid_.dt(); ++i) {
    const double mid = 0.5 * (lo + up);
    (phi(mid) < 0.0 ? lo : up) = mid;
  }
  return 0.5 * (lo + up);
}

double FieldStepper::F_source(int j, double t) {
  const NodeCache& c = cache_[j];
  const double split = sigma_of_layer_end(j, t, c.f_end, true);
  double B = 0.0;
  if (split < 0.0) {
    for (int q = 0; q < 2; ++q) B += c.f_weight * c.f[q].K * F_at(c.f[q], t + c.f[q].sigma);
    return B;
  }
  const double root3 = std::sqrt(3.0) / 6.0;
  for (const auto& [a, b] : {std::pair{0.0, split}, std::pair{split, c.f_end}}) {
    for (double u : {0.5 - root3, 0.5 + root3}) {
      const GaussPoint g = make_point(j, a + u * (b - a));
      B += 0.5 * (b - a) * g.K * F_at(g, t + g.sigma);
    }
  }
  return B;
}

double FieldStepper::G_source(int j, double t) {
  const NodeCache& c = cache_[j];
  const double dt = grid_.dt();
  const double split = sigma_of_layer_end(j, t, dt, false);
  double S = 0.0;
  if (split < 0.0) {
    for (int q = 0; q < 2; ++q) S += 0.5 * dt * c.q[q].H * G_at(c.q[q], t + c.q[q].sigma);
    return S;
  }
  const double root3 = std::sqrt(3.0) / 6.0;
  for (const auto& [a, b] : {std::pair{0.0, split}, std::pair{split, dt}}) {
    for (double u : {0.5 - root3, 0.5 + root3}) {
      const GaussPoint g = make_point(j, a + u * (b - a));
      S += 0.5 * (b - a) * g.H * G_at(g, t + g.sigma);
    }
  }
  return S;
}

// N at step n+1-k on the characteristic through node j at step n+1.
double FieldStepper::char_value(int j, int k) const {
  const Snapshot& s = recent_[static_cast<std::size_t>(k - 1)];
  const int idx = j - k;
  if (idx >= 1) return s.N[idx];
  return s.N[0] + (s.N[1] - s.N[0]) * std::exp((idx - 1) * grid_.dt());
}

double FieldStepper::char_value_P(int j) const {
  const int idx = j - 1;
  if (idx >= 1) return cur_.P[idx];
  return cur_.P[0] + (cur_.P[1] - cur_.P[0]) * std::exp(-grid_.dt());
}

const Snapshot& FieldStepper::advance() {
  const auto& spec = tables_->model();
  const auto& re = spec.reentry();
  const double dt = grid_.dt();
  const double t = static_cast<double>(n_) * dt;
  const double t_new = static_cast<double>(n_ + 1) * dt;
  const int M = grid_.M();
  const int known = static_cast<int>(std::min<long>(n_ + 1, 3));

  // Lagrange weights along a characteristic: offsets 0, -dt, -2dt, then +dt.
  double nodes[4];
  for (int k = 0; k < known; ++k) nodes[k] = -k * dt;
  nodes[known] = dt;
  double w[2][4];
  for (int q = 0; q < 2; ++q) {
    lagrange_weights(nodes, known + 1, cache_[1].q[q].sigma, w[q]);
  }

  Snapshot next;
  next.t = t_new;
  next.N.assign(static_cast<std::size_t>(M) + 1, 0.0);
  next.P.assign(static_cast<std::size_t>(M) + 1, 0.0);
  next.N[0] = boundary_->x(t_new);
  if (compute_P_) next.P[0] = boundary_->y(t_new);

  const double half = 0.5 * dt;
  for (int j = 1; j <= M; ++j) {
    const NodeCache& c = cache_[j];
    double v[3] = {0.0, 0.0, 0.0};
    for (int k = 1; k <= known; ++k) v[k - 1] = char_value(j, k);
    const double A = c.K * v[0];
    const double B = F_source(j, t);
    double known_part[2];
    for (int q = 0; q < 2; ++q) {
      known_part[q] = 0.0;
      for (int k = 0; k < known; ++k) known_part[q] += w[q][k] * v[k];
    }

    // Newton on R(N) = N - A + loss(N) - B
    double guess = known == 3 ? 3.0 * v[0] - 3.0 * v[1] + v[2] : A + B;
    double Nq[2] = {0.0, 0.0};
    double prev_change = std::numeric_limits<double>::infinity();
    int it = 0;
    for (; it < 5; ++it) {
      double R = guess - A - B;
      double dR = 1.0;
      for (int q = 0; q < 2; ++q) {
        const GaussPoint& g = c.q[q];
        Nq[q] = known_part[q] + w[q][known] * guess;
        R += half * g.K * hill_flux(re, g.b0, g.th, Nq[q]);
        dR += half * g.K * w[q][known] * hill_flux_derivative(re, g.b0, g.th, Nq[q]);
      }
      const double updated = guess - R / dR;
      const double change = std::abs(updated - guess);
      guess = updated;
      if (change <= 1e-15 * std::max(1.0, std::abs(updated))) break;
      if (it > 0 && change > prev_change && change > 1e-12 * std::max(1.0, std::abs(updated))) {
        throw FixedPointDivergence("fixed point diverged at m = " +
                                   std::to_string(grid_.m()[j]) + ", t = " +
                                   std::to_string(t_new));
      }
      prev_change = change;
    }
    for (int q = 0; q < 2; ++q) Nq[q] = known_part[q] + w[q][known] * guess;
    diag_.max_fixed_point_iterations = std::max(diag_.max_fixed_point_iterations, it + 1);
    next.N[j] = guess;

    if (compute_P_) {
      double P = c.H * char_value_P(j) - G_source(j, t);
      for (int q = 0; q < 2; ++q) {
        const GaussPoint& g = c.q[q];
        P += half * g.H * hill_flux(re, g.b0, g.th, Nq[q]);
      }
      next.P[j] = P;
    }
  }

  hist_.push(t_new, next.N);
  recent_.push_front(next);
  while (recent_.size() > 3) recent_.pop_back();
  cur_ = std::move(next);
  ++n_;
  ++diag_.steps;
  diag_.min_N = std::min(diag_.min_N, *std::min_element(cur_.N.begin(), cur_.N.end()));
  diag_.min_P = std::min(diag_.min_P, *std::min_element(cur_.P.begin(), cur_.P.end()));
  diag_.boundary_gap = std::max(diag_.boundary_gap, std::abs(cur_.N[1] - cur_.N[0]));
  return cur_;
}

double F_term(const chars::CharTables& tables, const model::InitialData& data, double t, double m,
              double x) {
  const auto& spec = tables.model();
  if (m > spec.division().at_one()) return 0.0;
  const double D = tables.delta(m);
  const double tD = spec.tau(D);
  if (t <= tD) {
    const double start = tables.chi(-t, spec.g_inv(m));
    return 2.0 * tables.xi(t, m) * data.Gamma(start, tD - t);
  }
  return 2.0 * tables.xi_bar(m) * spec.beta(D, x) * x;
}

double G_term(const chars::CharTables& tables, const model::InitialData& data, double t, double m,
              double x) {
  const auto& spec = tables.model();
  const double Th = tables.theta(m);
  const double tT = spec.tau(Th);
  if (t <= tT) return tables.pi(t, m) * data.Gamma(tables.chi(-t, m), tT - t);
  return tables.pi_bar(m) * spec.beta(Th, x) * x;
}

FieldSolution simulate(const chars::CharTables& tables, const model::InitialData& data, double T,
                       const SimulateOptions& opts) {
  const ResolvedGrid g = resolve_grid(tables.model(), opts.grid);
  FieldSolution sol;
  sol.dt = g.dt;
  sol.boundary = immature::solve_for(tables, data, T + 2.0 * g.dt, opts.immature);
  FieldStepper stepper(tables, data, g, sol.boundary, opts.compute_P);
  sol.m = stepper.grid().m();

  const long steps = std::lround(std::ceil(T / g.dt - 1e-9));
  std::set<long> dump_steps;
  for (double d : opts.dump_times) {
    if (d < 0.0 || d > T + 1e-12) throw ConfigError("dump time outside [0, T]");
    dump_steps.insert(std::lround(d / g.dt));
  }
  auto visit = [&](const Snapshot& s, long n) {
    if (dump_steps.count(n)) sol.dumps.push_back(s);
    if (opts.observer) opts.observer(s);
  };
  visit(stepper.current(), 0);
  for (long n = 1; n <= steps; ++n) visit(stepper.advance(), n);
  sol.diag = stepper.diagnostics();
  return sol;
}

}  // namespace matsim::solver
