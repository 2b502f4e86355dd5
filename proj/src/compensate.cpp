#include "fonbw/compensate.hpp"

#include <cmath>

#include "fonbw/errors.hpp"
#include "fonbw/identify.hpp"

namespace fonbw {

namespace {

constexpr std::size_t kMaxFixedPointIterations = 10;

void check_command(double u, double guard, std::size_t step) {
  if (!std::isfinite(u) || std::abs(u) > guard) throw DivergenceError("compensator command diverged", step);
}

void check_options(const CompensatorOptions& opts) {
  if (opts.fixed_point_iterations > kMaxFixedPointIterations)
    throw InvalidArgument("at most 10 fixed-point iterations per step are supported");
}

/// One RK4 step of a scalar state over [0, dt] with the command moving linearly
/// from u0 to u1 (constant rate).
template <class Rhs>
double rk4_linear_input(double x, double u0, double u1, double dt, Rhs&& rhs) {
  const double r = (u1 - u0) / dt;
  const double um = 0.5 * (u0 + u1);
  const double k1 = rhs(x, u0, r);
  const double k2 = rhs(x + 0.5 * dt * k1, um, r);
  const double k3 = rhs(x + 0.5 * dt * k2, um, r);
  const double k4 = rhs(x + dt * k3, u1, r);
  return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

TimeSeries compensate_fonbw(const TimeSeries& H_d, const FonbwParams& p, const CompensatorOptions& opts) {
  check_options(opts);
  p.validate();
  const double k_u1 = p.poly.coeffs.front();
  if (k_u1 == 0.0) throw InvalidArgument("FONBW compensator requires k_u1 != 0");

  FonbwStepper model(p, H_d.dt(), H_d.size(), opts.sim);
  std::vector<double> u(H_d.size());
  double u_prev = 0.0;
  for (std::size_t k = 0; k < H_d.size(); ++k) {
    double cmd;
    if (opts.fixed_point_iterations == 0) {
      const double hbar = model.advance(u_prev);
      cmd = (H_d[k] - p.k_h * hbar - p.poly.higher_terms(u_prev)) / k_u1;
    } else {
      // Solve k_u1 u + G(u) = H_d for the current step. The first update is the
      // plain inverse law; later ones are secant steps on its residual, which
      // stay convergent when |k_h dhbar/du| exceeds |k_u1|.
      auto residual = [&](double x) { return k_u1 * x + p.poly.higher_terms(x) + p.k_h * model.preview(x) - H_d[k]; };
      double x0 = u_prev;
      double r0 = residual(x0);
      cmd = x0 - r0 / k_u1;
      for (std::size_t it = 1; it < opts.fixed_point_iterations; ++it) {
        check_command(cmd, opts.sim.divergence_guard, k);
        const double r1 = residual(cmd);
        if (r1 == 0.0 || r1 == r0) break;
        const double next = cmd - r1 * (cmd - x0) / (r1 - r0);
        x0 = cmd;
        r0 = r1;
        cmd = next;
        if (std::abs(cmd - x0) <= 1e-15 * std::max(std::abs(cmd), 1.0)) break;
      }
      check_command(cmd, opts.sim.divergence_guard, k);
      model.advance(cmd);
    }
    check_command(cmd, opts.sim.divergence_guard, k);
    u[k] = cmd;
    u_prev = cmd;
  }
  return H_d.with_values(std::move(u), "V");
}

TimeSeries compensate_cbw(const TimeSeries& H_d, const CbwGainParams& p, const CompensatorOptions& opts) {
  check_options(opts);
  if (p.k_a == 0.0) throw InvalidArgument("CBW compensator requires k_a != 0");
  p.validate();
  const double dt = H_d.dt();
  const double inv_d = 1.0 / p.D;
  auto rhs = [&](double h, double, double r) {
    return inv_d * (p.A * r - p.beta * std::abs(r) * signed_pow(h, p.n) - p.gamma * r * std::pow(std::abs(h), p.n));
  };

  std::vector<double> u(H_d.size());
  double h = p.h_init;
  double model_in = 0.0;  // delayed command seen by the internal model
  for (std::size_t k = 0; k < H_d.size(); ++k) {
    const double next_in = k == 0 ? 0.0 : u[k - 1];
    if (k > 0) h = rk4_linear_input(h, model_in, next_in, dt, rhs);
    model_in = next_in;
    if (!std::isfinite(h) || std::abs(h) > opts.sim.divergence_guard)
      throw DivergenceError("CBW compensator state diverged", k);
    const double cmd = (H_d[k] - p.k_b * p.D * h) / p.k_a;
    check_command(cmd, opts.sim.divergence_guard, k);
    u[k] = cmd;
  }
  return H_d.with_values(std::move(u), "V");
}

TimeSeries compensate_zhu(const TimeSeries& H_d, const ZhuParams& p, const CompensatorOptions& opts) {
  check_options(opts);
  if (p.k1 == 0.0) throw InvalidArgument("Zhu compensator requires k1 != 0");
  if (!(p.tau > 0.0)) throw InvalidArgument("Zhu compensator requires tau > 0");
  // m0 only scales the reference acceleration here, so m0 = 0 is allowed.
  for (double v : {p.m0, p.c0, p.k0, p.k1, p.A, p.beta, p.gamma, p.delta, p.n})
    if (!std::isfinite(v)) throw InvalidArgument("Zhu parameters must be finite");
  if (!(p.n >= 1.0)) throw InvalidArgument("Zhu exponent n must be >= 1");
  const std::size_t m = H_d.size();
  const double dt = H_d.dt();

  const std::vector<double> rate = sample_rate(H_d);
  std::vector<double> accel(m, 0.0);
  if (m >= 3) {
    for (std::size_t k = 1; k + 1 < m; ++k) accel[k] = (H_d[k + 1] - 2.0 * H_d[k] + H_d[k - 1]) / (dt * dt);
    accel[0] = accel[1];
    accel[m - 1] = accel[m - 2];
  }

  auto rhs = [&](double h, double uu, double r) {
    const double sgn = (r > 0.0) - (r < 0.0);
    return p.A * r - p.beta * std::abs(r) * signed_pow(h, p.n) - p.gamma * r * std::pow(std::abs(h), p.n) +
           p.delta * uu * sgn;
  };

  std::vector<double> u(m);
  double h = 0.0;
  double model_in = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double next_in = k == 0 ? 0.0 : u[k - 1];
    if (k > 0) h = rk4_linear_input(h, model_in, next_in, dt, rhs);
    model_in = next_in;
    if (!std::isfinite(h) || std::abs(h) > opts.sim.divergence_guard)
      throw DivergenceError("Zhu compensator state diverged", k);
    const double t = H_d.time(k);
    const double demand = p.m0 * accel[k] + p.c0 * rate[k] + p.k0 * H_d[k] - h;
    // Formed in log space so a zero demand stays exactly zero after exp(t/tau) overflows.
    const double scaled = p.tau / p.k1 * demand;
    const double cmd = scaled == 0.0 ? 0.0 : std::copysign(std::exp(t / p.tau + std::log(std::abs(scaled))), scaled);
    check_command(cmd, opts.sim.divergence_guard, k);
    u[k] = cmd;
  }
  return H_d.with_values(std::move(u), "V");
}

TimeSeries compensate(const TimeSeries& H_d, const CompensatorParams& p, const CompensatorOptions& opts) {
  return std::visit(
      [&](const auto& q) -> TimeSeries {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, FonbwParams>)
          return compensate_fonbw(H_d, q, opts);
        else if constexpr (std::is_same_v<T, CbwGainParams>)
          return compensate_cbw(H_d, q, opts);
        else
          return compensate_zhu(H_d, q, opts);
      },
      p);
}

CompensationReport evaluate_cascade(const CompensatorParams& compensator, const ModelParams& plant,
                                    const TimeSeries& H_d, const CompensatorOptions& opts) {
  TimeSeries u = compensate(H_d, compensator, opts);
  TimeSeries H = simulate(plant, u, opts.sim);
  const double tracking = rms_error(H_d, H);
  const double input = rms_error(u, u.with_values(std::vector<double>(u.size(), 0.0)));
  return {std::move(u), std::move(H), tracking, input};
}

}  // namespace fonbw
