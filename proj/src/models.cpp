#include "fonbw/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fonbw/errors.hpp"

namespace fonbw {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw InvalidArgument(what);
}

bool finite_all(std::initializer_list<double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

void check_guard(double x, double guard, std::size_t step, const char* what) {
  if (!std::isfinite(x) || std::abs(x) > guard) throw DivergenceError(what, step);
}

}  // namespace

// ---------------------------------------------------------------- parameters

void CbwParams::validate() const {
  require(finite_all({alpha, k, D, A, beta, gamma, n, h_init}), "CBW parameters must be finite");
  require(n >= 1.0, "CBW exponent n must be >= 1");
  require(D != 0.0, "CBW parameter D must be non-zero");
  require(beta + gamma > 0.0, "CBW requires beta + gamma > 0");
  require(A / (beta + gamma) > 0.0, "CBW requires A / (beta + gamma) > 0");
}

void CbwGainParams::validate() const {
  require(finite_all({k_a, k_b, D, A, beta, gamma, n, h_init}), "CBW parameters must be finite");
  require(n >= 1.0, "CBW exponent n must be >= 1");
  require(D != 0.0, "CBW parameter D must be non-zero");
  require(beta + gamma > 0.0, "CBW requires beta + gamma > 0");
  require(A / (beta + gamma) > 0.0, "CBW requires A / (beta + gamma) > 0");
}

void NbwParams::validate() const {
  require(finite_all({k_u, k_h, rho, sigma, n, hbar_init}), "NBW parameters must be finite");
  require(n >= 1.0, "NBW exponent n must be >= 1");
}

double PolynomialGain::operator()(double u) const noexcept {
  // Horner on k_u1 u + ... + k_uN u^N = u (k_u1 + u (k_u2 + ...)).
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * u + *it;
  return acc * u;
}

double PolynomialGain::higher_terms(double u) const noexcept {
  double acc = 0.0;
  for (std::size_t i = coeffs.size(); i-- > 1;) acc = acc * u + coeffs[i];
  return acc * u * u;
}

void PolynomialGain::validate() const {
  require(!coeffs.empty(), "polynomial gain needs at least the linear coefficient");
  for (double c : coeffs) require(std::isfinite(c), "polynomial coefficients must be finite");
}

void AnbwParams::validate() const {
  poly.validate();
  nbw.validate();
}

void FonbwParams::validate() const {
  poly.validate();
  require(finite_all({k_h, rho, sigma, n, lambda1, lambda2, hbar_init}), "FONBW parameters must be finite");
  require(n >= 1.0, "FONBW exponent n must be >= 1");
  require(lambda1 > 0.0 && lambda1 <= 1.0, "lambda1 must lie in (0, 1]");
  require(lambda2 > 0.0 && lambda2 <= 1.0, "lambda2 must lie in (0, 1]");
}

void ZhuParams::validate() const {
  require(finite_all({m0, c0, k0, k1, x0, tau, A, beta, gamma, delta, n}), "Zhu parameters must be finite");
  require(m0 > 0.0, "Zhu mass m0 must be positive");
  require(tau > 0.0, "Zhu time constant tau must be positive");
  require(n >= 1.0, "Zhu exponent n must be >= 1");
}

std::string_view to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::Cbw: return "cbw";
    case ModelKind::Nbw: return "nbw";
    case ModelKind::Anbw: return "anbw";
    case ModelKind::Fonbw: return "fonbw";
    case ModelKind::Zhu: return "zhu";
  }
  return "?";
}

ModelKind model_kind_from_string(std::string_view name) {
  for (auto k : {ModelKind::Cbw, ModelKind::Nbw, ModelKind::Anbw, ModelKind::Fonbw, ModelKind::Zhu})
    if (to_string(k) == name) return k;
  throw InvalidArgument("unknown model kind '" + std::string(name) + "'");
}

ModelKind kind_of(const ModelParams& p) noexcept { return static_cast<ModelKind>(p.index()); }

// ------------------------------------------------------------- transforms

CbwGainParams to_gains(const CbwParams& p) {
  return {p.alpha * p.k, (1.0 - p.alpha) * p.k, p.D, p.A, p.beta, p.gamma, p.n, p.h_init};
}

CbwParams scale_cbw(const CbwParams& p, double c) {
  require(c > 0.0 && std::isfinite(c), "scale factor must be positive");
  CbwParams q = p;
  const double cn = std::pow(c, p.n);
  q.beta *= cn;
  q.gamma *= cn;
  q.D *= c;
  return q;
}

double cbw_h0(const CbwParams& p) {
  require(p.beta + p.gamma > 0.0, "normalization requires beta + gamma > 0");
  const double ratio = p.A / (p.beta + p.gamma);
  require(ratio > 0.0, "normalization requires A / (beta + gamma) > 0");
  return std::pow(ratio, 1.0 / p.n);
}

NbwParams normalize_cbw(const CbwParams& p) {
  p.validate();
  const double h0 = cbw_h0(p);
  NbwParams q;
  q.k_u = p.alpha * p.k;
  q.k_h = (1.0 - p.alpha) * p.D * p.k * h0;
  q.rho = p.A / (p.D * h0);
  q.sigma = p.beta / (p.beta + p.gamma);
  q.n = p.n;
  q.hbar_init = p.h_init / h0;
  return q;
}

CbwGainParams cbw_gains_from_nbw(const NbwParams& p) {
  p.validate();
  // With D = 1 and h0 = 1: A = rho, beta + gamma = A, k_b D h0 = k_h.
  CbwGainParams q;
  q.k_a = p.k_u;
  q.k_b = p.k_h;
  q.D = 1.0;
  q.A = p.rho;
  q.beta = p.sigma * p.rho;
  q.gamma = (1.0 - p.sigma) * p.rho;
  q.n = p.n;
  q.h_init = p.hbar_init;
  return q;
}

double signed_pow(double x, double n) noexcept {
  if (x == 0.0) return 0.0;
  const double m = std::pow(std::abs(x), n);
  return x > 0.0 ? m : -m;
}

std::vector<double> sample_rate(const TimeSeries& u) {
  const std::size_t m = u.size();
  std::vector<double> d(m, 0.0);
  if (m < 2) return d;
  const double dt = u.dt();
  d[0] = (u[1] - u[0]) / dt;
  d[m - 1] = (u[m - 1] - u[m - 2]) / dt;
  for (std::size_t k = 1; k + 1 < m; ++k) d[k] = (u[k + 1] - u[k - 1]) / (2.0 * dt);
  return d;
}

// ------------------------------------------------------ integer-order models

namespace {

/// Fixed-step RK4 of a scalar state driven by the sampled input rate. The rate
/// at the half step is the mean of the neighbouring samples.
template <class Rhs>
std::vector<double> integrate_rate_driven(double x0, const std::vector<double>& rate, double dt, double guard,
                                          Rhs&& rhs) {
  std::vector<double> x(rate.size());
  x[0] = x0;
  check_guard(x0, guard, 0, "hysteresis state diverged");
  for (std::size_t k = 0; k + 1 < rate.size(); ++k) {
    const double r0 = rate[k];
    const double r1 = rate[k + 1];
    const double rm = 0.5 * (r0 + r1);
    const double xk = x[k];
    const double k1 = rhs(xk, r0);
    const double k2 = rhs(xk + 0.5 * dt * k1, rm);
    const double k3 = rhs(xk + 0.5 * dt * k2, rm);
    const double k4 = rhs(xk + dt * k3, r1);
    x[k + 1] = xk + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    check_guard(x[k + 1], guard, k + 1, "hysteresis state diverged");
  }
  return x;
}

std::vector<double> cbw_state(const CbwGainParams& p, const TimeSeries& u, const SimOptions& opts) {
  p.validate();
  const double inv_d = 1.0 / p.D;
  return integrate_rate_driven(p.h_init, sample_rate(u), u.dt(), opts.divergence_guard, [&](double h, double r) {
    return inv_d * (p.A * r - p.beta * std::abs(r) * signed_pow(h, p.n) - p.gamma * r * std::pow(std::abs(h), p.n));
  });
}

std::vector<double> nbw_state(const NbwParams& p, const TimeSeries& u, const SimOptions& opts) {
  p.validate();
  return integrate_rate_driven(p.hbar_init, sample_rate(u), u.dt(), opts.divergence_guard, [&](double h, double r) {
    return p.rho *
           (r - p.sigma * std::abs(r) * signed_pow(h, p.n) + (p.sigma - 1.0) * r * std::pow(std::abs(h), p.n));
  });
}

}  // namespace

TimeSeries simulate_cbw(const CbwGainParams& p, const TimeSeries& u, const SimOptions& opts) {
  const auto h = cbw_state(p, u, opts);
  std::vector<double> out(u.size());
  const double gain = p.k_b * p.D;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = p.k_a * u[k] + gain * h[k];
  return u.with_values(std::move(out), "um");
}

TimeSeries simulate_cbw(const CbwParams& p, const TimeSeries& u, const SimOptions& opts) {
  p.validate();
  return simulate_cbw(to_gains(p), u, opts);
}

StateTrace simulate_nbw_state(const NbwParams& p, const TimeSeries& u, const SimOptions& opts) {
  StateTrace t;
  t.state = nbw_state(p, u, opts);
  t.output.resize(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) t.output[k] = p.k_u * u[k] + p.k_h * t.state[k];
  return t;
}

TimeSeries simulate_nbw(const NbwParams& p, const TimeSeries& u, const SimOptions& opts) {
  return u.with_values(simulate_nbw_state(p, u, opts).output, "um");
}

TimeSeries simulate_anbw(const PolynomialGain& poly, const NbwParams& p, const TimeSeries& u,
                         const SimOptions& opts) {
  poly.validate();
  const auto h = nbw_state(p, u, opts);
  std::vector<double> out(u.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = poly(u[k]) + p.k_h * h[k];
  return u.with_values(std::move(out), "um");
}

TimeSeries simulate_zhu(const ZhuParams& p, const TimeSeries& u, const SimOptions& opts) {
  p.validate();
  const auto rate = sample_rate(u);
  const double dt = u.dt();
  const double guard = opts.divergence_guard;
  const double force_gain = p.k1 / p.tau;

  struct State {
    double x, v, h;
  };
  auto rhs = [&](const State& s, double t, double uu, double r) {
    const double sgn = (r > 0.0) - (r < 0.0);
    const double force = force_gain * std::exp(-t / p.tau) * uu + s.h;
    const double acc = (force - p.c0 * s.v - p.k0 * (s.x - p.x0)) / p.m0;
    const double hdot = p.A * r - p.beta * std::abs(r) * signed_pow(s.h, p.n) -
                        p.gamma * r * std::pow(std::abs(s.h), p.n) + p.delta * uu * sgn;
    return State{s.v, acc, hdot};
  };
  auto axpy = [](const State& s, double a, const State& d) {
    return State{s.x + a * d.x, s.v + a * d.v, s.h + a * d.h};
  };

  std::vector<double> out(u.size());
  State s{p.x0, 0.0, 0.0};
  out[0] = s.x;
  for (std::size_t k = 0; k + 1 < u.size(); ++k) {
    const double t0 = u.time(k);
    const double tm = t0 + 0.5 * dt;
    const double um = 0.5 * (u[k] + u[k + 1]);
    const double rm = 0.5 * (rate[k] + rate[k + 1]);
    const State k1 = rhs(s, t0, u[k], rate[k]);
    const State k2 = rhs(axpy(s, 0.5 * dt, k1), tm, um, rm);
    const State k3 = rhs(axpy(s, 0.5 * dt, k2), tm, um, rm);
    const State k4 = rhs(axpy(s, dt, k3), t0 + dt, u[k + 1], rate[k + 1]);
    s.x += dt / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
    s.v += dt / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
    s.h += dt / 6.0 * (k1.h + 2.0 * k2.h + 2.0 * k3.h + k4.h);
    check_guard(s.x, guard, k + 1, "Zhu displacement diverged");
    check_guard(s.v, guard, k + 1, "Zhu velocity diverged");
    check_guard(s.h, guard, k + 1, "Zhu hysteresis state diverged");
    out[k + 1] = s.x;
  }
  return u.with_values(std::move(out));
}

// ------------------------------------------------------------------- FONBW

FonbwStepper::FonbwStepper(const FonbwParams& p, double dt, std::size_t expected_length, const SimOptions& opts)
    : p_(p),
      opts_(opts),
      w_u_(p.lambda1 > 0.0 && p.lambda1 <= 1.0 ? p.lambda1 : 1.0, 0),
      w_h_(p.lambda2 > 0.0 && p.lambda2 <= 1.0 ? p.lambda2 : 1.0, 0),
      rate_scale_(std::pow(dt, -p.lambda1)),
      state_scale_(std::pow(dt, -p.lambda2)) {
  p_.validate();
  require(dt > 0.0 && std::isfinite(dt), "time step must be positive");
  const std::size_t cap = expected_length > 0 ? opts.memory.window(expected_length - 1) : 0;
  w_u_.extend(cap);
  w_h_.extend(cap);
  u_.reserve(expected_length);
  hbar_.reserve(expected_length);
}

void FonbwStepper::refresh_lags() {
  const std::size_t k = u_.size();
  const std::size_t n = opts_.memory.window(k);
  if (n > w_u_.max_index()) {
    const std::size_t grow = std::max(n, 2 * w_u_.max_index());
    w_u_.extend(grow);
    w_h_.extend(grow);
  }
  u_lag_ = n == 0 ? 0.0 : detail::lagged_dot(w_u_.weights().data(), u_.data(), k, n);
  hbar_lag_ = n == 0 ? 0.0 : detail::lagged_dot(w_h_.weights().data(), hbar_.data(), k, n);
}

double FonbwStepper::preview(double u) const {
  if (u_.empty()) return p_.hbar_init;
  const double v = input_rate(u);
  const double x = solve(v);
  check_guard(x, opts_.divergence_guard, step(), "FONBW state diverged");
  return x;
}

double FonbwStepper::advance(double u) {
  const double x = preview(u);
  check_guard(u, opts_.divergence_guard, step(), "FONBW input diverged");
  u_.push_back(u);
  hbar_.push_back(x);
  refresh_lags();
  return x;
}

double FonbwStepper::solve(double v) const {
  if (!std::isfinite(v)) throw DivergenceError("fractional input rate is not finite", step());
  if (p_.n == 1.0) return solve_linear(v, p_.rho * v - state_scale_ * hbar_lag_);
  return solve_newton(v);
}

double FonbwStepper::solve_linear(double v, double numerator) const {
  // n = 1: the state equation is linear on each half-line hbar >= 0, hbar <= 0.
  // The two denominators reproduce the four branch closed forms.
  const double a = state_scale_;
  const double base = a + p_.rho * p_.sigma * std::abs(v);
  const double d_pos = base - p_.rho * (p_.sigma - 1.0) * v;
  const double d_neg = base + p_.rho * (p_.sigma - 1.0) * v;
  if (numerator == 0.0) return 0.0;
  const double x_pos = numerator / d_pos;
  const double x_neg = numerator / d_neg;
  const bool pos_ok = d_pos != 0.0 && x_pos >= 0.0;
  const bool neg_ok = d_neg != 0.0 && x_neg <= 0.0;
  if (pos_ok && neg_ok) return last_hbar() >= 0.0 ? x_pos : x_neg;
  if (pos_ok) return x_pos;
  if (neg_ok) return x_neg;
  throw SolverError("no consistent branch solution for the FONBW step", step());
}

double FonbwStepper::solve_newton(double v) const {
  const double a = state_scale_;
  const double b = a * hbar_lag_;
  const double rho = p_.rho, sigma = p_.sigma, n = p_.n;
  const double abs_v = std::abs(v);
  auto f = [&](double x) {
    const double ax_n = std::pow(std::abs(x), n);
    const double sx_n = x >= 0.0 ? ax_n : -ax_n;
    return a * x + b - rho * (v - sigma * abs_v * sx_n + (sigma - 1.0) * v * ax_n);
  };
  auto fprime = [&](double x) {
    const double sgn = x >= 0.0 ? 1.0 : -1.0;
    return a + rho * n * std::pow(std::abs(x), n - 1.0) * (sigma * abs_v - (sigma - 1.0) * v * sgn);
  };
  constexpr int kMaxIterations = 100;
  constexpr double kTol = 4.0 * std::numeric_limits<double>::epsilon();

  int it = 0;
  double x = last_hbar();
  double fx = f(x);
  if (fx == 0.0) return x;

  // Plain Newton from the previous state; leaves on any sign of trouble.
  for (; it < 30; ++it) {
    const double d = fprime(x);
    if (!(d > 0.0) || !std::isfinite(d)) break;
    const double dx = fx / d;
    const double xn = x - dx;
    if (!std::isfinite(xn)) break;
    const double fn = f(xn);
    if (!std::isfinite(fn) || std::abs(fn) > std::abs(fx)) break;
    x = xn;
    fx = fn;
    if (fx == 0.0 || std::abs(dx) <= kTol * std::abs(x)) return x;
  }

  // Bracket a sign change around the last iterate, then Newton safeguarded by bisection.
  const double x_lin = (rho * v - b) / a;
  double lo = std::min(x, x_lin), hi = std::max(x, x_lin);
  double span = std::max({hi - lo, 1e-3 * std::abs(x), 1e-300});
  lo -= span;
  hi += span;
  double flo = f(lo), fhi = f(hi);
  while ((flo > 0.0) == (fhi > 0.0)) {
    span *= 2.0;
    lo -= span;
    hi += span;
    if (!(std::abs(lo) <= opts_.divergence_guard && std::abs(hi) <= opts_.divergence_guard))
      throw SolverError("could not bracket the FONBW step solution", step());
    flo = f(lo);
    fhi = f(hi);
  }
  const double sign_lo = flo > 0.0 ? 1.0 : -1.0;
  x = 0.5 * (lo + hi);
  for (; it < kMaxIterations; ++it) {
    fx = f(x);
    if (fx == 0.0) return x;
    if ((fx > 0.0 ? 1.0 : -1.0) == sign_lo)
      lo = x;
    else
      hi = x;
    const double d = fprime(x);
    double xn = x - fx / d;
    if (!(xn > std::min(lo, hi) && xn < std::max(lo, hi)) || !std::isfinite(xn)) xn = 0.5 * (lo + hi);
    const double step_size = std::abs(xn - x);
    x = xn;
    if (step_size <= kTol * std::abs(x) || std::abs(hi - lo) <= kTol * std::abs(x) ||
        std::abs(hi - lo) < std::numeric_limits<double>::min())
      return x;
  }
  throw SolverError("FONBW step solve did not converge in 100 iterations", step());
}

FonbwTrace simulate_fonbw_trace(const FonbwParams& p, const TimeSeries& u, const SimOptions& opts) {
  FonbwStepper stepper(p, u.dt(), u.size(), opts);
  FonbwTrace tr;
  tr.output.resize(u.size());
  tr.hbar.resize(u.size());
  tr.input_rate.resize(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    tr.input_rate[k] = stepper.input_rate(u[k]);
    tr.hbar[k] = stepper.advance(u[k]);
    tr.output[k] = p.poly(u[k]) + p.k_h * tr.hbar[k];
    check_guard(tr.output[k], opts.divergence_guard, k, "FONBW output diverged");
  }
  return tr;
}

TimeSeries simulate_fonbw(const FonbwParams& p, const TimeSeries& u, const SimOptions& opts) {
  return u.with_values(simulate_fonbw_trace(p, u, opts).output, "um");
}

TimeSeries simulate(const ModelParams& p, const TimeSeries& u, const SimOptions& opts) {
  return std::visit(
      [&](const auto& q) -> TimeSeries {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, CbwGainParams>)
          return simulate_cbw(q, u, opts);
        else if constexpr (std::is_same_v<T, NbwParams>)
          return simulate_nbw(q, u, opts);
        else if constexpr (std::is_same_v<T, AnbwParams>)
          return simulate_anbw(q.poly, q.nbw, u, opts);
        else if constexpr (std::is_same_v<T, FonbwParams>)
          return simulate_fonbw(q, u, opts);
        else
          return simulate_zhu(q, u, opts);
      },
      p);
}

// ------------------------------------------------------------------ branches

std::string_view to_string(Branch b) noexcept {
  switch (b) {
    case Branch::PositiveAscending: return "positive-ascending";
    case Branch::PositiveDescending: return "positive-descending";
    case Branch::NegativeDescending: return "negative-descending";
    case Branch::NegativeAscending: return "negative-ascending";
  }
  return "?";
}

Branch classify_branch(double hbar, double v) noexcept {
  if (hbar >= 0.0) return v >= 0.0 ? Branch::PositiveAscending : Branch::PositiveDescending;
  return v >= 0.0 ? Branch::NegativeAscending : Branch::NegativeDescending;
}

}  // namespace fonbw
